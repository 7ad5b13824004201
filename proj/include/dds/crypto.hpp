#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dds::crypto {

using Bytes = std::vector<std::uint8_t>;

constexpr std::size_t kKeyLen = 32;    // AES-256
constexpr std::size_t kNonceLen = 12;  // GCM
constexpr std::size_t kTagLen = 16;
constexpr std::size_t kSaltLen = 16;

Bytes random_bytes(std::size_t n);

Bytes sha256(std::span<const std::uint8_t> data);
Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);
Bytes pbkdf2_sha256(std::string_view passphrase, std::span<const std::uint8_t> salt,
                    int iterations, std::size_t out_len);

// Returns ciphertext with the 16-byte tag appended.
Bytes aes256gcm_encrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce,
                        std::span<const std::uint8_t> aad, std::span<const std::uint8_t> plaintext);
// Throws AuthError when the tag does not verify.
Bytes aes256gcm_decrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce,
                        std::span<const std::uint8_t> aad, std::span<const std::uint8_t> ct_and_tag);

void secure_zero(void* p, std::size_t n);

// Byte buffer for key material; wiped on destruction.
class SecretBytes {
public:
    SecretBytes() = default;
    explicit SecretBytes(Bytes data) : data_(std::move(data)) {}
    SecretBytes(const SecretBytes&) = default;
    SecretBytes& operator=(const SecretBytes&) = default;
    SecretBytes(SecretBytes&&) noexcept = default;
    SecretBytes& operator=(SecretBytes&&) noexcept = default;
    ~SecretBytes() {
        if (!data_.empty()) secure_zero(data_.data(), data_.size());
    }

    std::span<const std::uint8_t> view() const { return data_; }
    const Bytes& bytes() const { return data_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

private:
    Bytes data_;
};

} // namespace dds::crypto
