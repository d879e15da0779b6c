/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "smoker/bytes.hpp"

namespace smoker::mqtt {

// Subset of MQTT 5.0: the nine packet kinds the protocol needs, QoS 0 only.

enum class PacketType : std::uint8_t {
    Connect = 1,
    Connack = 2,
    Publish = 3,
    Subscribe = 8,
    Suback = 9,
    Pingreq = 12,
    Pingresp = 13,
    Disconnect = 14,
    Auth = 15,
};

const char* packet_type_name(PacketType type);

namespace reason {
inline constexpr std::uint8_t kSuccess = 0x00;
inline constexpr std::uint8_t kContinueAuthentication = 0x18;
inline constexpr std::uint8_t kImplementationSpecificError = 0x83;
inline constexpr std::uint8_t kClientIdentifierNotValid = 0x85;
inline constexpr std::uint8_t kNotAuthorized = 0x87;
inline constexpr std::uint8_t kBadAuthenticationMethod = 0x8C;
}  // namespace reason

inline constexpr std::uint32_t kMaxRemainingLength = 268'435'455;

enum class DecodeErrorKind {
    Truncated,
    BadVarint,
    UnknownPacketType,
    MalformedProperties,
    ProtocolViolation,
};

class DecodeError : public std::runtime_error {
public:
    DecodeError(DecodeErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind(kind) {}
    DecodeErrorKind kind;
};

/// Encode-side failure (field over MQTT limits or remaining length overflow).
class EncodeError : public std::runtime_error {
public:
    explicit EncodeError(const std::string& what) : std::runtime_error(what) {}
};

/// A property the artifact carries through without interpreting. `value`
/// holds the encoded property value bytes (everything after the identifier).
struct OpaqueProperty {
    std::uint8_t id = 0;
    Bytes value;

    bool operator==(const OpaqueProperty&) const = default;
};

/// Properties of the property-bearing packets the auth exchange uses.
/// Invariant: method is present whenever data is present.
struct AuthProperties {
    std::optional<std::string> method;  // property 0x15
    std::optional<Bytes> data;          // property 0x16
    std::vector<OpaqueProperty> other;

    bool operator==(const AuthProperties&) const = default;
};

struct Connect {
    std::string client_id;
    std::uint16_t keep_alive = 0;
    bool clean_start = true;
    AuthProperties props;

    bool operator==(const Connect&) const = default;
};

struct Connack {
    bool session_present = false;
    std::uint8_t reason = reason::kSuccess;
    AuthProperties props;

    bool operator==(const Connack&) const = default;
};

struct Publish {
    std::string topic;
    Bytes payload;
    std::vector<OpaqueProperty> props;

    bool operator==(const Publish&) const = default;
};

struct Subscribe {
    std::uint16_t packet_id = 0;
    std::vector<std::string> topics;
    std::vector<OpaqueProperty> props;

    bool operator==(const Subscribe&) const = default;
};

struct Suback {
    std::uint16_t packet_id = 0;
    std::vector<std::uint8_t> reasons;
    std::vector<OpaqueProperty> props;

    bool operator==(const Suback&) const = default;
};

struct Pingreq {
    bool operator==(const Pingreq&) const = default;
};

struct Pingresp {
    bool operator==(const Pingresp&) const = default;
};

struct Disconnect {
    std::uint8_t reason = reason::kSuccess;
    std::vector<OpaqueProperty> props;

    bool operator==(const Disconnect&) const = default;
};

struct Auth {
    std::uint8_t reason = reason::kContinueAuthentication;
    AuthProperties props;

    bool operator==(const Auth&) const = default;
};

using Packet = std::variant<Connect, Connack, Publish, Subscribe, Suback, Pingreq, Pingresp,
                            Disconnect, Auth>;

PacketType packet_type(const Packet& p);

/// Canonical MQTT 5.0 encoding. Throws EncodeError when a field exceeds its
/// wire limit or the remaining length would overflow.
Bytes encode_packet(const Packet& p);

/// Decodes exactly one packet occupying the whole frame; trailing bytes
/// inside the declared remaining length are rejected. Throws DecodeError.
Packet decode_packet(ByteView frame);

/// Total frame length (fixed header + remaining length) once enough bytes
/// are buffered, nullopt while more bytes are needed. Throws DecodeError on
/// a malformed length varint.
std::optional<std::size_t> peek_packet_length(ByteView buffer);

/// MQTT variable byte integer, 7 bits per byte, continuation high bit.
Bytes encode_varint(std::uint32_t n);
std::pair<std::uint32_t, std::size_t> decode_varint(ByteView data);

}  // namespace smoker::mqtt
