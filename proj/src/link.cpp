#include "dds/link.hpp"

#include <zlib.h>

#include <algorithm>

namespace dds {

namespace {

const std::array<std::uint8_t, 4> kFrameMagic = {'D', 'D', 'S', 'W'};

void put_u32be(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

bool known_message_type(std::uint8_t t) {
    return t >= static_cast<std::uint8_t>(MessageType::Hello) &&
           t <= static_cast<std::uint8_t>(MessageType::Error);
}

} // namespace

std::uint32_t frame_crc32(std::span<const std::uint8_t> data) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, data.data(), static_cast<uInt>(data.size())));
}

Bytes encode_frame(MessageType type, std::span<const std::uint8_t> payload) {
    if (payload.size() > kMaxPayloadLen) throw ProtocolError("payload exceeds 2^24-1 bytes");

    Bytes out(kFrameMagic.begin(), kFrameMagic.end());
    out.push_back(kFrameVersion);

    Bytes checked;  // msg_type || length || payload
    checked.push_back(static_cast<std::uint8_t>(type));
    put_u32be(checked, static_cast<std::uint32_t>(payload.size()));
    checked.insert(checked.end(), payload.begin(), payload.end());

    out.insert(out.end(), checked.begin(), checked.end());
    put_u32be(out, frame_crc32(checked));
    return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> data) {
    DecodeResult r;

    // Magic is rejected as soon as any prefix byte mismatches.
    const std::size_t magic_avail = std::min(data.size(), kFrameMagic.size());
    for (std::size_t i = 0; i < magic_avail; ++i) {
        if (data[i] != kFrameMagic[i]) {
            r.status = DecodeStatus::BadMagic;
            return r;
        }
    }
    if (data.size() < 5) return r;  // NeedMoreData
    if (data[4] != kFrameVersion) {
        r.status = DecodeStatus::BadVersion;
        return r;
    }
    if (data.size() < 10) return r;

    const std::uint32_t len = get_u32be(data.data() + 6);
    if (len > kMaxPayloadLen) {
        r.status = DecodeStatus::Oversize;
        return r;
    }
    const std::size_t total = kFrameOverhead + len;
    if (data.size() < total) return r;

    std::span<const std::uint8_t> checked(data.data() + 5, 5 + len);
    const std::uint32_t expected = get_u32be(data.data() + 10 + len);
    if (frame_crc32(checked) != expected) {
        r.status = DecodeStatus::BadCrc;
        return r;
    }

    r.status = DecodeStatus::Ok;
    r.frame.msg_type = data[5];
    r.frame.payload.assign(data.begin() + 10, data.begin() + 10 + len);
    r.consumed = total;
    return r;
}

Bytes ConsentGrant::encode_payload() const {
    if (scopes.size() > 255) throw ProtocolError("too many consent scopes");
    Bytes out;
    out.push_back(static_cast<std::uint8_t>(scopes.size()));
    for (const auto& [kind, dir] : scopes) {
        out.push_back(static_cast<std::uint8_t>(kind));
        out.push_back(static_cast<std::uint8_t>(dir));
    }
    return out;
}

ConsentGrant ConsentGrant::decode_payload(std::span<const std::uint8_t> payload) {
    if (payload.empty()) throw ProtocolError("empty consent payload");
    const std::size_t count = payload[0];
    if (payload.size() != 1 + 2 * count) throw ProtocolError("consent payload length mismatch");

    ConsentGrant grant;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t kind = payload[1 + 2 * i];
        const std::uint8_t dir = payload[2 + 2 * i];
        if (kind < static_cast<std::uint8_t>(SensorKind::Accel) ||
            kind > static_cast<std::uint8_t>(SensorKind::Spo2))
            throw ProtocolError("unknown sensor kind in consent");
        if (dir != static_cast<std::uint8_t>(ScopeDirection::Read) &&
            dir != static_cast<std::uint8_t>(ScopeDirection::Write))
            throw ProtocolError("unknown scope direction in consent");
        grant.scopes.insert({static_cast<SensorKind>(kind), static_cast<ScopeDirection>(dir)});
    }
    return grant;
}

void LinkListener::respond(MessageType type, std::span<const std::uint8_t> payload) {
    Bytes frame = encode_frame(type, payload);
    tx_buffer_.insert(tx_buffer_.end(), frame.begin(), frame.end());
}

void LinkListener::fail_session(LinkErrorCode code, const std::string& message) {
    Bytes payload;
    payload.push_back(static_cast<std::uint8_t>(code));
    payload.insert(payload.end(), message.begin(), message.end());
    respond(MessageType::Error, payload);
    if (code != LinkErrorCode::Consent) {
        state_ = SessionState::Closed;
        rx_buffer_.clear();
    }
}

void LinkListener::on_bytes(std::span<const std::uint8_t> data) {
    if (state_ == SessionState::Closed) return;
    rx_buffer_.insert(rx_buffer_.end(), data.begin(), data.end());

    while (state_ != SessionState::Closed && !rx_buffer_.empty()) {
        DecodeResult r = decode_frame(rx_buffer_);
        if (r.status == DecodeStatus::NeedMoreData) break;
        if (r.status != DecodeStatus::Ok) {
            // No resynchronization: any framing error ends the session.
            fail_session(LinkErrorCode::BadFrame, "framing error");
            break;
        }
        rx_buffer_.erase(rx_buffer_.begin(),
                         rx_buffer_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
        handle_frame(r.frame);
    }
}

void LinkListener::handle_frame(const Frame& frame) {
    if (!known_message_type(frame.msg_type)) {
        fail_session(LinkErrorCode::Protocol, "unknown message type");
        return;
    }
    const auto type = static_cast<MessageType>(frame.msg_type);

    switch (state_) {
        case SessionState::AwaitingHello:
            if (type == MessageType::Hello) {
                respond(MessageType::Ack, {});
                state_ = SessionState::AwaitingConsent;
            } else {
                fail_session(LinkErrorCode::Protocol, "expected HELLO");
            }
            return;

        case SessionState::AwaitingConsent:
            if (type == MessageType::Consent) {
                try {
                    scopes_ = ConsentGrant::decode_payload(frame.payload);
                } catch (const ProtocolError&) {
                    fail_session(LinkErrorCode::Protocol, "malformed consent");
                    return;
                }
                respond(MessageType::Ack, {});
                state_ = SessionState::Established;
            } else if (type == MessageType::Hello) {
                fail_session(LinkErrorCode::Protocol, "duplicate HELLO");
            } else {
                fail_session(LinkErrorCode::Protocol, "expected CONSENT");
            }
            return;

        case SessionState::Established:
            if (type == MessageType::Sample) {
                SensorSample sample;
                try {
                    sample = sample_from_json_line(
                        std::string(frame.payload.begin(), frame.payload.end()));
                } catch (const Error&) {
                    fail_session(LinkErrorCode::Protocol, "malformed sample payload");
                    return;
                }
                if (!scopes_.allows(sample.kind(), ScopeDirection::Read)) {
                    fail_session(LinkErrorCode::Consent, "kind not granted");  // stays open
                    return;
                }
                delivered_.push_back(std::move(sample));
                respond(MessageType::Ack, {});
            } else if (type == MessageType::Error) {
                state_ = SessionState::Closed;
            } else {
                fail_session(LinkErrorCode::Protocol, "unexpected message when established");
            }
            return;

        case SessionState::Closed:
            return;
    }
}

void LinkListener::send_alert(const std::string& alert_json) {
    if (state_ != SessionState::Established) throw ClosedSession("alert on unestablished session");
    respond(MessageType::Alert,
            std::span<const std::uint8_t>(
                reinterpret_cast<const std::uint8_t*>(alert_json.data()), alert_json.size()));
}

Bytes LinkListener::take_outgoing() {
    Bytes out;
    out.swap(tx_buffer_);
    return out;
}

void LoopbackSession::pump() {
    Bytes from = listener_.take_outgoing();
    from_listener_.insert(from_listener_.end(), from.begin(), from.end());
}

LoopbackSession::Reply LoopbackSession::transact(MessageType type,
                                                 std::span<const std::uint8_t> payload) {
    Bytes frame = encode_frame(type, payload);
    listener_.on_bytes(frame);
    pump();

    // Drain listener->client frames; ALERTs are collected on the way.
    Reply reply;
    while (true) {
        DecodeResult r = decode_frame(from_listener_);
        if (r.status != DecodeStatus::Ok) break;
        from_listener_.erase(from_listener_.begin(),
                             from_listener_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
        if (r.frame.msg_type == static_cast<std::uint8_t>(MessageType::Alert)) {
            alerts_.emplace_back(r.frame.payload.begin(), r.frame.payload.end());
            continue;
        }
        reply.frame = r.frame;
    }
    return reply;
}

void LoopbackSession::send_hello(std::string_view device_id) {
    Reply r = transact(MessageType::Hello,
                       std::span<const std::uint8_t>(
                           reinterpret_cast<const std::uint8_t*>(device_id.data()),
                           device_id.size()));
    if (!r.frame || r.frame->msg_type != static_cast<std::uint8_t>(MessageType::Ack))
        throw ProtocolError("HELLO refused");
}

void LoopbackSession::send_consent(const ConsentGrant& grant) {
    Reply r = transact(MessageType::Consent, grant.encode_payload());
    if (!r.frame || r.frame->msg_type != static_cast<std::uint8_t>(MessageType::Ack))
        throw ProtocolError("CONSENT refused");
}

LoopbackSession::SendOutcome LoopbackSession::send_sample(const SensorSample& sample) {
    if (listener_.state() == SessionState::Closed) throw ClosedSession("send_sample");
    if (listener_.state() != SessionState::Established)
        throw ProtocolError("session not established");

    const std::string line = sample_to_json_line(sample);
    Reply r = transact(MessageType::Sample,
                       std::span<const std::uint8_t>(
                           reinterpret_cast<const std::uint8_t*>(line.data()), line.size()));
    if (r.frame && r.frame->msg_type == static_cast<std::uint8_t>(MessageType::Ack))
        return SendOutcome::Acked;
    if (r.frame && r.frame->msg_type == static_cast<std::uint8_t>(MessageType::Error) &&
        !r.frame->payload.empty() &&
        r.frame->payload[0] == static_cast<std::uint8_t>(LinkErrorCode::Consent))
        return SendOutcome::ConsentDenied;
    throw ProtocolError("sample refused");
}

void LoopbackSession::send_raw(std::span<const std::uint8_t> data) {
    listener_.on_bytes(data);
    pump();
    // Drop any error responses; callers inspect state directly.
    while (true) {
        DecodeResult r = decode_frame(from_listener_);
        if (r.status != DecodeStatus::Ok) break;
        from_listener_.erase(from_listener_.begin(),
                             from_listener_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
    }
}

std::vector<std::string> LoopbackSession::take_alerts() {
    pump();
    while (true) {
        DecodeResult r = decode_frame(from_listener_);
        if (r.status != DecodeStatus::Ok) break;
        from_listener_.erase(from_listener_.begin(),
                             from_listener_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
        if (r.frame.msg_type == static_cast<std::uint8_t>(MessageType::Alert))
            alerts_.emplace_back(r.frame.payload.begin(), r.frame.payload.end());
    }
    std::vector<std::string> out;
    out.swap(alerts_);
    return out;
}

void handshake(LoopbackSession& session, const ConsentGrant& grant, std::string_view device_id) {
    session.send_hello(device_id);
    session.send_consent(grant);
}

SecureChannel::SecureChannel(Bytes preshared_key) : key_(crypto::SecretBytes(std::move(preshared_key))) {
    if (key_.size() != crypto::kKeyLen) throw ConfigError("secure channel key must be 32 bytes");
}

namespace {

Bytes counter_nonce(std::uint64_t counter) {
    Bytes nonce(crypto::kNonceLen, 0);
    for (int i = 0; i < 8; ++i)
        nonce[crypto::kNonceLen - 1 - i] = static_cast<std::uint8_t>(counter >> (8 * i));
    return nonce;
}

const std::array<std::uint8_t, 4> kChannelAad = {'D', 'D', 'S', 'L'};

} // namespace

Bytes SecureChannel::seal(std::span<const std::uint8_t> message) {
    Bytes nonce = counter_nonce(send_counter_++);
    Bytes ct = crypto::aes256gcm_encrypt(key_.view(), nonce, kChannelAad, message);
    Bytes out;
    put_u32be(out, static_cast<std::uint32_t>(ct.size()));
    out.insert(out.end(), ct.begin(), ct.end());
    return out;
}

void SecureChannel::feed(std::span<const std::uint8_t> data) {
    rx_buffer_.insert(rx_buffer_.end(), data.begin(), data.end());
}

std::optional<Bytes> SecureChannel::open_next() {
    if (rx_buffer_.size() < 4) return std::nullopt;
    const std::uint32_t ct_len = get_u32be(rx_buffer_.data());
    if (rx_buffer_.size() < 4 + static_cast<std::size_t>(ct_len)) return std::nullopt;

    Bytes nonce = counter_nonce(recv_counter_);
    Bytes plaintext = crypto::aes256gcm_decrypt(
        key_.view(), nonce, kChannelAad,
        std::span<const std::uint8_t>(rx_buffer_.data() + 4, ct_len));
    ++recv_counter_;
    rx_buffer_.erase(rx_buffer_.begin(), rx_buffer_.begin() + 4 + ct_len);
    return plaintext;
}

} // namespace dds
