#include "dds/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <memory>
#include <stdexcept>

#include "dds/errors.hpp"

namespace dds::crypto {

namespace {

struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

[[noreturn]] void fail(const char* what) {
    throw std::runtime_error(std::string("openssl failure: ") + what);
}

} // namespace

Bytes random_bytes(std::size_t n) {
    Bytes out(n);
    if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) fail("RAND_bytes");
    return out;
}

Bytes sha256(std::span<const std::uint8_t> data) {
    Bytes out(SHA256_DIGEST_LENGTH);
    SHA256(data.data(), data.size(), out.data());
    return out;
}

Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data) {
    Bytes out(SHA256_DIGEST_LENGTH);
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
             out.data(), &len) == nullptr)
        fail("HMAC");
    out.resize(len);
    return out;
}

Bytes pbkdf2_sha256(std::string_view passphrase, std::span<const std::uint8_t> salt,
                    int iterations, std::size_t out_len) {
    Bytes out(out_len);
    if (PKCS5_PBKDF2_HMAC(passphrase.data(), static_cast<int>(passphrase.size()), salt.data(),
                          static_cast<int>(salt.size()), iterations, EVP_sha256(),
                          static_cast<int>(out_len), out.data()) != 1)
        fail("PBKDF2");
    return out;
}

Bytes aes256gcm_encrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce,
                        std::span<const std::uint8_t> aad,
                        std::span<const std::uint8_t> plaintext) {
    if (key.size() != kKeyLen || nonce.size() != kNonceLen)
        throw std::invalid_argument("bad key or nonce length");

    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("ctx alloc");
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1)
        fail("EncryptInit");

    int len = 0;
    if (!aad.empty() &&
        EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
        fail("aad update");

    Bytes out(plaintext.size() + kTagLen);
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1)
        fail("EncryptUpdate");
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + plaintext.size(), &fin) != 1)
        fail("EncryptFinal");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, static_cast<int>(kTagLen),
                            out.data() + plaintext.size()) != 1)
        fail("get tag");
    return out;
}

Bytes aes256gcm_decrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> nonce,
                        std::span<const std::uint8_t> aad,
                        std::span<const std::uint8_t> ct_and_tag) {
    if (key.size() != kKeyLen || nonce.size() != kNonceLen)
        throw std::invalid_argument("bad key or nonce length");
    if (ct_and_tag.size() < kTagLen) throw AuthError("ciphertext shorter than tag");

    const std::size_t ct_len = ct_and_tag.size() - kTagLen;

    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("ctx alloc");
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1)
        fail("DecryptInit");

    int len = 0;
    if (!aad.empty() &&
        EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
        fail("aad update");

    Bytes out(ct_len);
    if (ct_len > 0 && EVP_DecryptUpdate(ctx.get(), out.data(), &len, ct_and_tag.data(),
                                        static_cast<int>(ct_len)) != 1)
        fail("DecryptUpdate");

    Bytes tag(ct_and_tag.begin() + static_cast<std::ptrdiff_t>(ct_len), ct_and_tag.end());
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(kTagLen),
                            tag.data()) != 1)
        fail("set tag");

    int fin = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + ct_len, &fin) != 1)
        throw AuthError("authentication tag mismatch");
    return out;
}

void secure_zero(void* p, std::size_t n) { OPENSSL_cleanse(p, n); }

} // namespace dds::crypto
