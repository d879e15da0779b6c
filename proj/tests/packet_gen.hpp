// Randomized MQTT packet generator for round-trip property tests.
#pragma once

#include <random>
#include <string>

#include "smoker/mqtt.hpp"

namespace smoker::testgen {

class PacketGen {
public:
    explicit PacketGen(std::uint64_t seed) : rng_(seed) {}

    mqtt::Packet next() {
        switch (pick(9)) {
            case 0: return gen_connect();
            case 1: return gen_connack();
            case 2: return gen_publish();
            case 3: return gen_subscribe();
            case 4: return gen_suback();
            case 5: return mqtt::Pingreq{};
            case 6: return mqtt::Pingresp{};
            case 7: return gen_disconnect();
            default: return gen_auth();
        }
    }

    Bytes random_bytes(std::size_t max_len) {
        Bytes out(pick(max_len + 1));
        for (auto& b : out) b = static_cast<std::uint8_t>(pick(256));
        return out;
    }

    std::uint32_t pick(std::uint32_t bound) {
        return std::uniform_int_distribution<std::uint32_t>(0, bound - 1)(rng_);
    }

private:
    std::string random_string(std::size_t min_len, std::size_t max_len) {
        static const char* alphabet =
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789/_-. ";
        std::size_t len = min_len + pick(static_cast<std::uint32_t>(max_len - min_len + 1));
        std::string out;
        for (std::size_t i = 0; i < len; i++) out.push_back(alphabet[pick(67)]);
        if (pick(4) == 0) out += "\xC3\xA9\xE2\x82\xAC";  // é€: exercise multi-byte UTF-8
        return out;
    }

    std::string random_topic() {
        std::string t = random_string(1, 24);
        for (auto& c : t)
            if (c == '+' || c == '#') c = '_';
        return t;
    }

    std::uint8_t reason_code() {
        static const std::uint8_t codes[] = {0x00, 0x18, 0x83, 0x85, 0x87, 0x8C};
        return codes[pick(6)];
    }

    mqtt::OpaqueProperty opaque_for(mqtt::PacketType ctx) {
        // property ids legal for the context, minus the auth pair
        std::vector<std::uint8_t> ids;
        switch (ctx) {
            case mqtt::PacketType::Connect: ids = {0x11, 0x17, 0x19, 0x21, 0x22, 0x26, 0x27}; break;
            case mqtt::PacketType::Connack:
                ids = {0x11, 0x12, 0x13, 0x1A, 0x1C, 0x1F, 0x21, 0x22, 0x24, 0x25, 0x26};
                break;
            case mqtt::PacketType::Publish: ids = {0x01, 0x02, 0x03, 0x08, 0x09, 0x0B, 0x23, 0x26}; break;
            case mqtt::PacketType::Subscribe: ids = {0x0B, 0x26}; break;
            case mqtt::PacketType::Suback: ids = {0x1F, 0x26}; break;
            case mqtt::PacketType::Disconnect: ids = {0x11, 0x1C, 0x1F, 0x26}; break;
            case mqtt::PacketType::Auth: ids = {0x1F, 0x26}; break;
            default: ids = {0x26}; break;
        }
        std::uint8_t id = ids[pick(static_cast<std::uint32_t>(ids.size()))];
        mqtt::OpaqueProperty p;
        p.id = id;
        p.value = encode_value(id);
        return p;
    }

    Bytes encode_value(std::uint8_t id) {
        Bytes out;
        auto put_u16 = [&](std::uint16_t v) {
            out.push_back(static_cast<std::uint8_t>(v >> 8));
            out.push_back(static_cast<std::uint8_t>(v));
        };
        auto put_str = [&](const std::string& s) {
            put_u16(static_cast<std::uint16_t>(s.size()));
            out.insert(out.end(), s.begin(), s.end());
        };
        switch (id) {
            case 0x01: case 0x17: case 0x19: case 0x24: case 0x25:
                out.push_back(static_cast<std::uint8_t>(pick(2)));
                break;
            case 0x13: case 0x21: case 0x22: case 0x23:
                put_u16(static_cast<std::uint16_t>(pick(65536)));
                break;
            case 0x02: case 0x11: case 0x18: case 0x27: {
                std::uint32_t v = pick(1u << 30);
                out.push_back(static_cast<std::uint8_t>(v >> 24));
                out.push_back(static_cast<std::uint8_t>(v >> 16));
                out.push_back(static_cast<std::uint8_t>(v >> 8));
                out.push_back(static_cast<std::uint8_t>(v));
                break;
            }
            case 0x0B:
                out = mqtt::encode_varint(1 + pick(200000));
                break;
            case 0x09: {
                Bytes data = random_bytes(16);
                put_u16(static_cast<std::uint16_t>(data.size()));
                out.insert(out.end(), data.begin(), data.end());
                break;
            }
            case 0x26:
                put_str(random_string(0, 8));
                put_str(random_string(0, 8));
                break;
            default:  // utf8 string-valued ids
                put_str(random_string(0, 12));
                break;
        }
        return out;
    }

    std::vector<mqtt::OpaqueProperty> opaques(mqtt::PacketType ctx) {
        std::vector<mqtt::OpaqueProperty> out;
        std::uint32_t n = pick(3);
        std::vector<bool> used(256, false);
        for (std::uint32_t i = 0; i < n; i++) {
            auto p = opaque_for(ctx);
            if (used[p.id] && p.id != 0x26) continue;  // no duplicates except user props
            used[p.id] = true;
            out.push_back(std::move(p));
        }
        return out;
    }

    mqtt::AuthProperties auth_props(mqtt::PacketType ctx, bool method_required) {
        mqtt::AuthProperties props;
        if (method_required || pick(2) == 0) {
            props.method = pick(2) == 0 ? "SMOKER" : random_string(1, 10);
            if (pick(2) == 0) props.data = random_bytes(48);
        }
        props.other = opaques(ctx);
        return props;
    }

    mqtt::Connect gen_connect() {
        mqtt::Connect p;
        p.client_id = random_string(0, 43);
        p.keep_alive = static_cast<std::uint16_t>(pick(65536));
        p.clean_start = pick(2) == 0;
        p.props = auth_props(mqtt::PacketType::Connect, false);
        return p;
    }

    mqtt::Connack gen_connack() {
        mqtt::Connack p;
        p.session_present = pick(2) == 0;
        p.reason = reason_code();
        p.props = auth_props(mqtt::PacketType::Connack, false);
        return p;
    }

    mqtt::Publish gen_publish() {
        mqtt::Publish p;
        p.topic = random_topic();
        p.payload = random_bytes(256);
        p.props = opaques(mqtt::PacketType::Publish);
        return p;
    }

    mqtt::Subscribe gen_subscribe() {
        mqtt::Subscribe p;
        p.packet_id = static_cast<std::uint16_t>(1 + pick(65535));
        std::uint32_t n = 1 + pick(4);
        for (std::uint32_t i = 0; i < n; i++) p.topics.push_back(random_topic());
        p.props = opaques(mqtt::PacketType::Subscribe);
        return p;
    }

    mqtt::Suback gen_suback() {
        mqtt::Suback p;
        p.packet_id = static_cast<std::uint16_t>(1 + pick(65535));
        p.reasons.assign(1 + pick(4), 0x00);
        p.props = opaques(mqtt::PacketType::Suback);
        return p;
    }

    mqtt::Disconnect gen_disconnect() {
        mqtt::Disconnect p;
        p.reason = reason_code();
        p.props = opaques(mqtt::PacketType::Disconnect);
        return p;
    }

    mqtt::Auth gen_auth() {
        mqtt::Auth p;
        p.reason = reason_code();
        p.props = auth_props(mqtt::PacketType::Auth, true);
        return p;
    }

    std::mt19937_64 rng_;
};

}  // namespace smoker::testgen
