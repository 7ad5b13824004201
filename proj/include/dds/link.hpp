#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dds/crypto.hpp"
#include "dds/sensor_model.hpp"

namespace dds {

using crypto::Bytes;

// Wire frame: "DDSW" | version 0x01 | msg_type u8 | length u32be | payload |
// crc32 u32be over msg_type || length || payload. Encoded size is exactly
// 14 + payload length.
constexpr std::size_t kFrameOverhead = 14;
constexpr std::uint8_t kFrameVersion = 0x01;
constexpr std::uint32_t kMaxPayloadLen = (1u << 24) - 1;

enum class MessageType : std::uint8_t {
    Hello = 1,
    Consent = 2,
    Sample = 3,
    Alert = 4,
    Ack = 5,
    Error = 6,
};

struct Frame {
    std::uint8_t msg_type = 0;  // raw; the session layer rejects unknown values
    Bytes payload;
};

// CRC-32 (reflected, polynomial 0xEDB88320) as used by the frame trailer.
std::uint32_t frame_crc32(std::span<const std::uint8_t> data);

// Throws ProtocolError when the payload exceeds kMaxPayloadLen.
Bytes encode_frame(MessageType type, std::span<const std::uint8_t> payload);

enum class DecodeStatus { Ok, NeedMoreData, BadMagic, BadVersion, BadCrc, Oversize };

struct DecodeResult {
    DecodeStatus status = DecodeStatus::NeedMoreData;
    Frame frame;             // valid when status == Ok
    std::size_t consumed = 0;  // bytes consumed from the input when Ok
};

// Incremental and total: never throws, any byte string yields Ok, NeedMoreData
// or an error status.
DecodeResult decode_frame(std::span<const std::uint8_t> data);

enum class ScopeDirection : std::uint8_t { Read = 1, Write = 2 };

// The data-sharing permission fixed at handshake time: which sensor kinds the
// peer may read or write. Immutable once the session is established.
struct ConsentGrant {
    std::set<std::pair<SensorKind, ScopeDirection>> scopes;

    bool allows(SensorKind kind, ScopeDirection dir) const {
        return scopes.count({kind, dir}) > 0;
    }

    // count u8 | (kind u8, direction u8) pairs
    Bytes encode_payload() const;
    static ConsentGrant decode_payload(std::span<const std::uint8_t> payload);  // ProtocolError
};

enum class SessionState { AwaitingHello, AwaitingConsent, Established, Closed };

enum class LinkErrorCode : std::uint8_t {
    Protocol = 1,
    Consent = 2,
    BadFrame = 3,
    Closed = 4,
};

// Receiving ("phone") side of the link. Single reader; feeds raw transport
// bytes in, queues response bytes out. SAMPLE frames are delivered only when
// their kind was granted for READ; a codec error closes the session rather
// than attempting resynchronization.
class LinkListener {
public:
    void on_bytes(std::span<const std::uint8_t> data);

    // Queues an ALERT frame (vibration command) towards the watch.
    void send_alert(const std::string& alert_json);

    Bytes take_outgoing();

    SessionState state() const { return state_; }
    const ConsentGrant& scopes() const { return scopes_; }
    const std::vector<SensorSample>& delivered() const { return delivered_; }

private:
    void handle_frame(const Frame& frame);
    void respond(MessageType type, std::span<const std::uint8_t> payload);
    void fail_session(LinkErrorCode code, const std::string& message);

    SessionState state_ = SessionState::AwaitingHello;
    ConsentGrant scopes_;
    Bytes rx_buffer_;
    Bytes tx_buffer_;
    std::vector<SensorSample> delivered_;
};

// Sending ("watch") side plus an in-process loopback transport to a
// LinkListener. Stands in for the Bluetooth/Wi-Fi pairing.
class LoopbackSession {
public:
    enum class SendOutcome { Acked, ConsentDenied };

    // Throws ProtocolError if the listener refuses (duplicate or out of order).
    void send_hello(std::string_view device_id = "watch");
    void send_consent(const ConsentGrant& grant);

    // Requires an established, open session; throws ClosedSession otherwise.
    SendOutcome send_sample(const SensorSample& sample);

    // Injects raw bytes without framing, for corruption scenarios.
    void send_raw(std::span<const std::uint8_t> data);

    SessionState state() const { return listener_.state(); }
    LinkListener& listener() { return listener_; }
    // ALERT payloads received from the listener since the last call.
    std::vector<std::string> take_alerts();

private:
    struct Reply {
        std::optional<Frame> frame;
    };
    Reply transact(MessageType type, std::span<const std::uint8_t> payload);
    void pump();

    LinkListener listener_;
    Bytes from_listener_;
    std::vector<std::string> alerts_;
};

// HELLO followed by CONSENT; leaves the session ESTABLISHED or throws.
void handshake(LoopbackSession& session, const ConsentGrant& grant,
               std::string_view device_id = "watch");

// Optional confidentiality wrapper for one transport direction: each sealed
// message is len u32be | AEAD ct under a pre-shared key with a counter nonce.
// Not used by the plain loopback path.
class SecureChannel {
public:
    explicit SecureChannel(Bytes preshared_key);

    Bytes seal(std::span<const std::uint8_t> message);
    void feed(std::span<const std::uint8_t> data);
    std::optional<Bytes> open_next();  // AuthError on tamper

private:
    crypto::SecretBytes key_;
    std::uint64_t send_counter_ = 0;
    std::uint64_t recv_counter_ = 0;
    Bytes rx_buffer_;
};

} // namespace dds
