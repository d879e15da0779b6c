/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "smoker/mqtt.hpp"

#include <algorithm>
#include <array>

namespace smoker::mqtt {

namespace {

using enum DecodeErrorKind;

[[noreturn]] void fail(DecodeErrorKind kind, const std::string& what) {
    throw DecodeError(kind, what);
}

// ---- property tables ----------------------------------------------------

enum class PropShape { Byte, U16, U32, VarInt, Binary, Utf8, Utf8Pair };

constexpr std::uint8_t kPropAuthMethod = 0x15;
constexpr std::uint8_t kPropAuthData = 0x16;
constexpr std::uint8_t kPropUserProperty = 0x26;

std::optional<PropShape> prop_shape(std::uint8_t id) {
    switch (id) {
        case 0x01: case 0x17: case 0x19: case 0x24: case 0x25:
        case 0x28: case 0x29: case 0x2A:
            return PropShape::Byte;
        case 0x13: case 0x21: case 0x22: case 0x23:
            return PropShape::U16;
        case 0x02: case 0x11: case 0x18: case 0x27:
            return PropShape::U32;
        case 0x0B:
            return PropShape::VarInt;
        case 0x09: case kPropAuthData:
            return PropShape::Binary;
        case 0x03: case 0x08: case 0x12: case kPropAuthMethod:
        case 0x1A: case 0x1C: case 0x1F:
            return PropShape::Utf8;
        case kPropUserProperty:
            return PropShape::Utf8Pair;
        default:
            return std::nullopt;
    }
}

bool prop_legal_in(PacketType type, std::uint8_t id) {
    auto any_of = [id](std::initializer_list<std::uint8_t> ids) {
        return std::find(ids.begin(), ids.end(), id) != ids.end();
    };
    switch (type) {
        case PacketType::Connect:
            return any_of({0x11, 0x15, 0x16, 0x17, 0x19, 0x21, 0x22, 0x26, 0x27});
        case PacketType::Connack:
            return any_of({0x11, 0x12, 0x13, 0x15, 0x16, 0x1A, 0x1C, 0x1F, 0x21, 0x22, 0x24,
                           0x25, 0x26, 0x27, 0x28, 0x29, 0x2A});
        case PacketType::Publish:
            return any_of({0x01, 0x02, 0x03, 0x08, 0x09, 0x0B, 0x23, 0x26});
        case PacketType::Subscribe:
            return any_of({0x0B, 0x26});
        case PacketType::Suback:
            return any_of({0x1F, 0x26});
        case PacketType::Disconnect:
            return any_of({0x11, 0x1C, 0x1F, 0x26});
        case PacketType::Auth:
            return any_of({0x15, 0x16, 0x1F, 0x26});
        default:
            return false;
    }
}

// Reason codes the artifact emits; everything else is outside the subset.
bool artifact_reason_code(std::uint8_t code) {
    switch (code) {
        case reason::kSuccess:
        case reason::kContinueAuthentication:
        case reason::kImplementationSpecificError:
        case reason::kClientIdentifierNotValid:
        case reason::kNotAuthorized:
        case reason::kBadAuthenticationMethod:
            return true;
        default:
            return false;
    }
}

// MQTT strings: well-formed UTF-8, no U+0000, no surrogates.
bool is_valid_mqtt_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b = static_cast<std::uint8_t>(s[i]);
        if (b == 0x00) return false;
        if (b < 0x80) {
            i++;
            continue;
        }
        std::size_t len;
        std::uint32_t cp;
        if ((b & 0xE0) == 0xC0) {
            len = 2;
            cp = b & 0x1F;
        } else if ((b & 0xF0) == 0xE0) {
            len = 3;
            cp = b & 0x0F;
        } else if ((b & 0xF8) == 0xF0) {
            len = 4;
            cp = b & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; k++) {
            const auto cont = static_cast<std::uint8_t>(s[i + k]);
            if ((cont & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cont & 0x3F);
        }
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000))
            return false;  // overlong
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

bool has_wildcard(std::string_view topic) {
    return topic.find('+') != std::string_view::npos ||
           topic.find('#') != std::string_view::npos;
}

// ---- primitive readers/writers ------------------------------------------

struct Reader {
    ByteView data;
    std::size_t pos = 0;

    std::size_t remaining() const { return data.size() - pos; }
    bool done() const { return pos == data.size(); }

    std::uint8_t u8() {
        if (remaining() < 1) fail(Truncated, "ran out of bytes reading byte");
        return data[pos++];
    }

    std::uint16_t u16() {
        if (remaining() < 2) fail(Truncated, "ran out of bytes reading u16");
        std::uint16_t v = static_cast<std::uint16_t>(data[pos] << 8 | data[pos + 1]);
        pos += 2;
        return v;
    }

    std::uint32_t u32() {
        if (remaining() < 4) fail(Truncated, "ran out of bytes reading u32");
        std::uint32_t v = (std::uint32_t(data[pos]) << 24) | (std::uint32_t(data[pos + 1]) << 16) |
                          (std::uint32_t(data[pos + 2]) << 8) | std::uint32_t(data[pos + 3]);
        pos += 4;
        return v;
    }

    std::uint32_t varint() {
        auto [value, used] = decode_varint(data.subspan(pos));
        pos += used;
        return value;
    }

    ByteView take(std::size_t n) {
        if (remaining() < n) fail(Truncated, "ran out of bytes reading field");
        ByteView out = data.subspan(pos, n);
        pos += n;
        return out;
    }

    std::string str() {
        std::uint16_t n = u16();
        ByteView raw = take(n);
        std::string out(reinterpret_cast<const char*>(raw.data()), raw.size());
        if (!is_valid_mqtt_utf8(out))
            fail(ProtocolViolation, "string is not well-formed MQTT UTF-8");
        return out;
    }

    Bytes bin() {
        std::uint16_t n = u16();
        ByteView raw = take(n);
        return Bytes(raw.begin(), raw.end());
    }
};

struct Writer {
    Bytes out;

    void u8(std::uint8_t v) { out.push_back(v); }

    void u16(std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v));
    }

    void u32(std::uint32_t v) {
        out.push_back(static_cast<std::uint8_t>(v >> 24));
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v));
    }

    void varint(std::uint32_t v) { append(out, encode_varint(v)); }

    void str(std::string_view s) {
        if (s.size() > 0xFFFF) throw EncodeError("string exceeds 65535 bytes");
        if (!is_valid_mqtt_utf8(s)) throw EncodeError("string is not well-formed MQTT UTF-8");
        u16(static_cast<std::uint16_t>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }

    void bin(ByteView b) {
        if (b.size() > 0xFFFF) throw EncodeError("binary field exceeds 65535 bytes");
        u16(static_cast<std::uint16_t>(b.size()));
        append(out, b);
    }
};

// ---- properties ----------------------------------------------------------

Bytes read_prop_value(Reader& r, PropShape shape) {
    const std::size_t start = r.pos;
    switch (shape) {
        case PropShape::Byte:
            r.u8();
            break;
        case PropShape::U16:
            r.u16();
            break;
        case PropShape::U32:
            r.u32();
            break;
        case PropShape::VarInt:
            r.varint();
            break;
        case PropShape::Binary:
            r.bin();
            break;
        case PropShape::Utf8:
            r.str();
            break;
        case PropShape::Utf8Pair:
            r.str();
            r.str();
            break;
    }
    ByteView raw = r.data.subspan(start, r.pos - start);
    return Bytes(raw.begin(), raw.end());
}

AuthProperties read_properties(Reader& r, PacketType ctx) {
    std::uint32_t length = r.varint();
    if (length > r.remaining()) fail(Truncated, "property length exceeds packet");
    Reader props{r.data.subspan(r.pos, length)};
    r.pos += length;

    AuthProperties out;
    std::array<bool, 256> seen{};
    while (!props.done()) {
        std::uint32_t id_value = props.varint();
        if (id_value > 0x7F) fail(MalformedProperties, "unknown property identifier");
        auto id = static_cast<std::uint8_t>(id_value);
        auto shape = prop_shape(id);
        if (!shape) fail(MalformedProperties, "unknown property identifier");
        if (!prop_legal_in(ctx, id))
            fail(MalformedProperties, std::string("property not allowed in ") +
                                          packet_type_name(ctx));
        if (seen[id] && id != kPropUserProperty)
            fail(MalformedProperties, "duplicate property");
        seen[id] = true;

        if (id == kPropAuthMethod) {
            out.method = props.str();
        } else if (id == kPropAuthData) {
            out.data = props.bin();
        } else {
            out.other.push_back(OpaqueProperty{id, read_prop_value(props, *shape)});
        }
    }
    if (out.data && !out.method)
        fail(ProtocolViolation, "authentication data without authentication method");
    return out;
}

void write_properties(Writer& w, PacketType ctx, const AuthProperties& props) {
    if (props.data && !props.method)
        throw EncodeError("authentication data without authentication method");
    Writer body;
    if (props.method) {
        body.u8(kPropAuthMethod);
        body.str(*props.method);
    }
    if (props.data) {
        body.u8(kPropAuthData);
        body.bin(*props.data);
    }
    for (const auto& p : props.other) {
        if (p.id == kPropAuthMethod || p.id == kPropAuthData)
            throw EncodeError("authentication properties must use the dedicated fields");
        auto shape = prop_shape(p.id);
        if (!shape) throw EncodeError("unknown property identifier");
        if (!prop_legal_in(ctx, p.id))
            throw EncodeError(std::string("property not allowed in ") + packet_type_name(ctx));
        // round-trip the value bytes through a reader so malformed opaque
        // payloads cannot be emitted
        Reader check{ByteView(p.value.data(), p.value.size())};
        try {
            read_prop_value(check, *shape);
        } catch (const DecodeError&) {
            throw EncodeError("opaque property value is malformed");
        }
        if (!check.done()) throw EncodeError("opaque property value has trailing bytes");
        body.u8(p.id);
        append(body.out, p.value);
    }
    w.varint(static_cast<std::uint32_t>(body.out.size()));
    append(w.out, body.out);
}

AuthProperties plain_props(const std::vector<OpaqueProperty>& other) {
    AuthProperties props;
    props.other = other;
    return props;
}

// ---- per-packet decoding --------------------------------------------------

Connect decode_connect(Reader& r) {
    Connect p;
    if (r.str() != "MQTT") fail(ProtocolViolation, "protocol name is not MQTT");
    if (r.u8() != 5) fail(ProtocolViolation, "protocol level is not 5");
    std::uint8_t flags = r.u8();
    if (flags & 0x01) fail(ProtocolViolation, "reserved connect flag set");
    if (flags & 0xFC)
        fail(ProtocolViolation, "will/username/password flags outside the subset");
    p.clean_start = flags & 0x02;
    p.keep_alive = r.u16();
    p.props = read_properties(r, PacketType::Connect);
    p.client_id = r.str();
    return p;
}

Connack decode_connack(Reader& r) {
    Connack p;
    std::uint8_t ack_flags = r.u8();
    if (ack_flags & 0xFE) fail(ProtocolViolation, "reserved connack flag set");
    p.session_present = ack_flags & 0x01;
    p.reason = r.u8();
    if (!artifact_reason_code(p.reason)) fail(ProtocolViolation, "reason code outside subset");
    p.props = read_properties(r, PacketType::Connack);
    return p;
}

Publish decode_publish(Reader& r) {
    Publish p;
    p.topic = r.str();
    if (p.topic.empty()) fail(ProtocolViolation, "empty publish topic");
    if (has_wildcard(p.topic)) fail(ProtocolViolation, "wildcard character in publish topic");
    p.props = read_properties(r, PacketType::Publish).other;
    ByteView payload = r.take(r.remaining());
    p.payload.assign(payload.begin(), payload.end());
    return p;
}

Subscribe decode_subscribe(Reader& r) {
    Subscribe p;
    p.packet_id = r.u16();
    if (p.packet_id == 0) fail(ProtocolViolation, "subscribe packet id is zero");
    p.props = read_properties(r, PacketType::Subscribe).other;
    while (!r.done()) {
        std::string topic = r.str();
        if (topic.empty()) fail(ProtocolViolation, "empty subscribe topic filter");
        std::uint8_t options = r.u8();
        if (options != 0x00)
            fail(ProtocolViolation, "subscription options outside the QoS 0 subset");
        p.topics.push_back(std::move(topic));
    }
    if (p.topics.empty()) fail(ProtocolViolation, "subscribe with no topic filters");
    return p;
}

Suback decode_suback(Reader& r) {
    Suback p;
    p.packet_id = r.u16();
    p.props = read_properties(r, PacketType::Suback).other;
    while (!r.done()) {
        std::uint8_t code = r.u8();
        if (code != reason::kSuccess) fail(ProtocolViolation, "suback reason outside subset");
        p.reasons.push_back(code);
    }
    if (p.reasons.empty()) fail(ProtocolViolation, "suback with no reason codes");
    return p;
}

Disconnect decode_disconnect(Reader& r) {
    Disconnect p;
    if (r.done()) return p;  // remaining length 0: success, no properties
    p.reason = r.u8();
    if (!artifact_reason_code(p.reason)) fail(ProtocolViolation, "reason code outside subset");
    if (!r.done()) p.props = read_properties(r, PacketType::Disconnect).other;
    return p;
}

Auth decode_auth(Reader& r) {
    Auth p;
    if (r.done()) {
        // remaining length 0 would mean success with no properties, but an
        // AUTH without an authentication method is a protocol error
        fail(ProtocolViolation, "auth without authentication method");
    }
    p.reason = r.u8();
    if (!artifact_reason_code(p.reason)) fail(ProtocolViolation, "reason code outside subset");
    p.props = read_properties(r, PacketType::Auth);
    if (!p.props.method) fail(ProtocolViolation, "auth without authentication method");
    return p;
}

// ---- per-packet encoding ----------------------------------------------------

void encode_body(Writer& w, const Connect& p) {
    w.str("MQTT");
    w.u8(5);
    w.u8(p.clean_start ? 0x02 : 0x00);
    w.u16(p.keep_alive);
    write_properties(w, PacketType::Connect, p.props);
    w.str(p.client_id);
}

void encode_body(Writer& w, const Connack& p) {
    if (!artifact_reason_code(p.reason)) throw EncodeError("reason code outside subset");
    w.u8(p.session_present ? 0x01 : 0x00);
    w.u8(p.reason);
    write_properties(w, PacketType::Connack, p.props);
}

void encode_body(Writer& w, const Publish& p) {
    if (p.topic.empty()) throw EncodeError("empty publish topic");
    if (has_wildcard(p.topic)) throw EncodeError("wildcard character in publish topic");
    w.str(p.topic);
    write_properties(w, PacketType::Publish, plain_props(p.props));
    append(w.out, ByteView(p.payload.data(), p.payload.size()));
}

void encode_body(Writer& w, const Subscribe& p) {
    if (p.packet_id == 0) throw EncodeError("subscribe packet id is zero");
    if (p.topics.empty()) throw EncodeError("subscribe with no topic filters");
    w.u16(p.packet_id);
    write_properties(w, PacketType::Subscribe, plain_props(p.props));
    for (const auto& topic : p.topics) {
        if (topic.empty()) throw EncodeError("empty subscribe topic filter");
        w.str(topic);
        w.u8(0x00);  // QoS 0, no options
    }
}

void encode_body(Writer& w, const Suback& p) {
    if (p.reasons.empty()) throw EncodeError("suback with no reason codes");
    w.u16(p.packet_id);
    write_properties(w, PacketType::Suback, plain_props(p.props));
    for (std::uint8_t code : p.reasons) {
        if (code != reason::kSuccess) throw EncodeError("suback reason outside subset");
        w.u8(code);
    }
}

void encode_body(Writer&, const Pingreq&) {}
void encode_body(Writer&, const Pingresp&) {}

void encode_body(Writer& w, const Disconnect& p) {
    if (!artifact_reason_code(p.reason)) throw EncodeError("reason code outside subset");
    w.u8(p.reason);
    write_properties(w, PacketType::Disconnect, plain_props(p.props));
}

void encode_body(Writer& w, const Auth& p) {
    if (!artifact_reason_code(p.reason)) throw EncodeError("reason code outside subset");
    if (!p.props.method) throw EncodeError("auth without authentication method");
    w.u8(p.reason);
    write_properties(w, PacketType::Auth, p.props);
}

std::uint8_t fixed_header_byte(PacketType type) {
    std::uint8_t flags = type == PacketType::Subscribe ? 0x02 : 0x00;
    return static_cast<std::uint8_t>((static_cast<std::uint8_t>(type) << 4) | flags);
}

}  // namespace

const char* packet_type_name(PacketType type) {
    switch (type) {
        case PacketType::Connect: return "CONNECT";
        case PacketType::Connack: return "CONNACK";
        case PacketType::Publish: return "PUBLISH";
        case PacketType::Subscribe: return "SUBSCRIBE";
        case PacketType::Suback: return "SUBACK";
        case PacketType::Pingreq: return "PINGREQ";
        case PacketType::Pingresp: return "PINGRESP";
        case PacketType::Disconnect: return "DISCONNECT";
        case PacketType::Auth: return "AUTH";
    }
    return "UNKNOWN";
}

PacketType packet_type(const Packet& p) {
    struct Visitor {
        PacketType operator()(const Connect&) { return PacketType::Connect; }
        PacketType operator()(const Connack&) { return PacketType::Connack; }
        PacketType operator()(const Publish&) { return PacketType::Publish; }
        PacketType operator()(const Subscribe&) { return PacketType::Subscribe; }
        PacketType operator()(const Suback&) { return PacketType::Suback; }
        PacketType operator()(const Pingreq&) { return PacketType::Pingreq; }
        PacketType operator()(const Pingresp&) { return PacketType::Pingresp; }
        PacketType operator()(const Disconnect&) { return PacketType::Disconnect; }
        PacketType operator()(const Auth&) { return PacketType::Auth; }
    };
    return std::visit(Visitor{}, p);
}

Bytes encode_varint(std::uint32_t n) {
    if (n > kMaxRemainingLength) throw EncodeError("variable byte integer overflow");
    Bytes out;
    do {
        std::uint8_t digit = n % 128;
        n /= 128;
        if (n > 0) digit |= 0x80;
        out.push_back(digit);
    } while (n > 0);
    return out;
}

std::pair<std::uint32_t, std::size_t> decode_varint(ByteView data) {
    std::uint32_t value = 0;
    std::uint32_t multiplier = 1;
    std::size_t i = 0;
    for (;;) {
        if (i >= data.size()) fail(Truncated, "ran out of bytes reading varint");
        std::uint8_t byte = data[i];
        value += (byte & 0x7F) * multiplier;
        i++;
        if ((byte & 0x80) == 0) {
            if (i > 1 && byte == 0) fail(BadVarint, "non-minimal varint encoding");
            return {value, i};
        }
        if (i == 4) fail(BadVarint, "varint continuation bit on fourth byte");
        multiplier *= 128;
    }
}

std::optional<std::size_t> peek_packet_length(ByteView buffer) {
    if (buffer.size() < 2) return std::nullopt;
    ByteView tail = buffer.subspan(1);
    try {
        auto [remaining, used] = decode_varint(tail);
        return 1 + used + remaining;
    } catch (const DecodeError& e) {
        if (e.kind == Truncated) return std::nullopt;  // need more bytes
        throw;
    }
}

Bytes encode_packet(const Packet& p) {
    Writer body;
    std::visit([&body](const auto& concrete) { encode_body(body, concrete); }, p);
    if (body.out.size() > kMaxRemainingLength)
        throw EncodeError("remaining length exceeds maximum");
    Bytes out;
    out.reserve(body.out.size() + 5);
    out.push_back(fixed_header_byte(packet_type(p)));
    append(out, encode_varint(static_cast<std::uint32_t>(body.out.size())));
    append(out, ByteView(body.out.data(), body.out.size()));
    return out;
}

Packet decode_packet(ByteView frame) {
    Reader header{frame};
    std::uint8_t first = header.u8();
    std::uint8_t type_nibble = first >> 4;
    std::uint8_t flags = first & 0x0F;
    std::uint32_t remaining = header.varint();
    if (remaining > header.remaining()) fail(Truncated, "remaining length exceeds frame");
    if (remaining < header.remaining())
        fail(ProtocolViolation, "trailing bytes after packet");
    Reader r{frame.subspan(header.pos, remaining)};

    auto require_flags = [&](std::uint8_t expected) {
        if (flags != expected) fail(ProtocolViolation, "bad fixed header flags");
    };

    Packet packet;
    switch (type_nibble) {
        case 1:
            require_flags(0x00);
            packet = decode_connect(r);
            break;
        case 2:
            require_flags(0x00);
            packet = decode_connack(r);
            break;
        case 3:
            // QoS 0 only: DUP, QoS and RETAIN bits must all be clear
            if (flags & 0x06) fail(ProtocolViolation, "publish QoS outside the QoS 0 subset");
            if (flags & 0x09) fail(ProtocolViolation, "publish DUP/RETAIN outside the subset");
            packet = decode_publish(r);
            break;
        case 8:
            require_flags(0x02);
            packet = decode_subscribe(r);
            break;
        case 9:
            require_flags(0x00);
            packet = decode_suback(r);
            break;
        case 12:
            require_flags(0x00);
            if (!r.done()) fail(ProtocolViolation, "pingreq with payload");
            packet = Pingreq{};
            break;
        case 13:
            require_flags(0x00);
            if (!r.done()) fail(ProtocolViolation, "pingresp with payload");
            packet = Pingresp{};
            break;
        case 14:
            require_flags(0x00);
            packet = decode_disconnect(r);
            break;
        case 15:
            require_flags(0x00);
            packet = decode_auth(r);
            break;
        default:
            fail(UnknownPacketType, "packet type outside the subset");
    }
    if (!r.done()) fail(ProtocolViolation, "trailing bytes inside packet body");
    return packet;
}

}  // namespace smoker::mqtt
