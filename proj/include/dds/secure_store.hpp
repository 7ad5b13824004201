#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dds/crypto.hpp"
#include "dds/errors.hpp"

namespace dds {

using crypto::Bytes;

// Two-tier data-at-rest scheme: a passphrase-derived master key wraps a
// keyset; the keyset's key_tag_key names preferences deterministically
// (HMAC-SHA256, matchable but not decryptable) and its value_key encrypts
// values and record files with AES-256-GCM under fresh random nonces.

constexpr int kMinKdfIterations = 10000;
constexpr int kDefaultKdfIterations = 100000;

struct KdfParams {
    int iterations = kDefaultKdfIterations;
};

struct MasterKey {
    crypto::SecretBytes key;  // 32 bytes
};

// Deterministic for fixed inputs; raises WeakParams below kMinKdfIterations.
MasterKey derive_master_key(std::string_view passphrase, std::span<const std::uint8_t> salt,
                            const KdfParams& params);

using KeysetId = std::array<std::uint8_t, 16>;

struct Keyset {
    KeysetId id{};
    crypto::SecretBytes key_tag_key;  // 32 bytes, deterministic name tags
    crypto::SecretBytes value_key;    // 32 bytes, AEAD for values and files
};

struct WrappedKeyset {
    KeysetId id{};
    Bytes blob;  // nonce || AEAD(master, keys); fresh nonce per wrap
};

WrappedKeyset create_keyset(const MasterKey& master);
// Raises AuthError for a wrong master key or a tampered blob.
Keyset open_keyset(const MasterKey& master, const WrappedKeyset& wrapped);

// --- Encrypted record files -------------------------------------------------
//
// Layout (all integers big-endian):
//   header: magic "DDSR" | version 0x01 | keyset_id (16) | salt (16, random per file)
//   chunk:  seq_no u32 | nonce (12) | ct_len u32 | ct
// Chunk AAD is sha256(header) || seq_no, so chunks verify only in their file,
// in order. Chunk plaintext is 0x00 || record for data; the final sentinel
// chunk carries an empty plaintext (ct_len = 16, tag only) at seq_no = count,
// which makes truncation detectable.

extern const std::array<std::uint8_t, 4> kRecordFileMagic;  // "DDSR"
constexpr std::uint8_t kRecordFileVersion = 0x01;

void write_records(const std::filesystem::path& path, const Keyset& keyset,
                   const std::vector<Bytes>& records);
// Raises AuthError(seq) at the first chunk that fails (flip, reorder, splice,
// truncation, missing sentinel); IoError only for filesystem failures.
std::vector<Bytes> read_records(const std::filesystem::path& path, const Keyset& keyset);

// --- Keyset file -------------------------------------------------------------

struct KeysetFile {
    Bytes kdf_salt;  // 16 bytes
    int kdf_iterations = kDefaultKdfIterations;
    WrappedKeyset wrapped;

    std::string to_json() const;
    static KeysetFile from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static KeysetFile load(const std::filesystem::path& path);
};

// --- Preference store --------------------------------------------------------
//
// A store directory holds keyset.json (public salt + wrapped keyset) and
// prefs.ddsr, a record file of (key_tag_len, key_tag, nonce, ct) tuples.
// Names are matchable via their tags but never recoverable from disk.
class SecureStore {
public:
    static bool exists(const std::filesystem::path& dir);
    // Fresh salt and keyset; fails if the directory already holds one.
    static SecureStore create(const std::filesystem::path& dir, std::string_view passphrase,
                              const KdfParams& params = {});
    static SecureStore open(const std::filesystem::path& dir, std::string_view passphrase);
    static SecureStore open_or_create(const std::filesystem::path& dir,
                                      std::string_view passphrase, const KdfParams& params = {});

    void put(std::string_view name, const Bytes& value);
    Bytes get(std::string_view name) const;  // NotFound if absent
    bool contains(std::string_view name) const;
    std::size_t size() const { return entries_.size(); }

    // Deterministic tag for a preference name under this store's keyset.
    Bytes key_tag(std::string_view name) const;

    const std::filesystem::path& dir() const { return dir_; }
    static std::filesystem::path prefs_path(const std::filesystem::path& dir);
    static std::filesystem::path keyset_path(const std::filesystem::path& dir);

private:
    SecureStore(std::filesystem::path dir, Keyset keyset);
    void load();
    void flush() const;

    struct ValueCipher {
        Bytes nonce;
        Bytes ct;  // ciphertext || tag
    };

    std::filesystem::path dir_;
    Keyset keyset_;
    std::map<Bytes, ValueCipher> entries_;  // key_tag -> encrypted value
};

} // namespace dds
