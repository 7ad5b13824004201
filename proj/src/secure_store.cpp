#include "dds/secure_store.hpp"

#include <fstream>

#include "json.hpp"

namespace dds {

namespace {

using nlohmann::json;

constexpr std::uint8_t kDataChunkPrefix = 0x00;
const std::array<std::uint8_t, 5> kKeysetWrapAad = {'D', 'D', 'S', 'K', kRecordFileVersion};
constexpr std::uint8_t kPrefValueAad = 0x01;  // preference format version

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

std::string to_hex(std::span<const std::uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(const std::string& text) {
    if (text.size() % 2 != 0) throw IoError("odd-length hex string");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw IoError("bad hex digit");
    };
    Bytes out;
    out.reserve(text.size() / 2);
    for (std::size_t i = 0; i < text.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>(nibble(text[i]) << 4 | nibble(text[i + 1])));
    return out;
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("short write to " + path.string());
}

} // namespace

const std::array<std::uint8_t, 4> kRecordFileMagic = {'D', 'D', 'S', 'R'};

MasterKey derive_master_key(std::string_view passphrase, std::span<const std::uint8_t> salt,
                            const KdfParams& params) {
    if (params.iterations < kMinKdfIterations)
        throw WeakParams("iterations below " + std::to_string(kMinKdfIterations));
    if (salt.size() != crypto::kSaltLen) throw ConfigError("salt must be 16 bytes");
    return MasterKey{crypto::SecretBytes(
        crypto::pbkdf2_sha256(passphrase, salt, params.iterations, crypto::kKeyLen))};
}

WrappedKeyset create_keyset(const MasterKey& master) {
    WrappedKeyset w;
    Bytes id = crypto::random_bytes(w.id.size());
    std::copy(id.begin(), id.end(), w.id.begin());

    Bytes keys = crypto::random_bytes(2 * crypto::kKeyLen);
    Bytes nonce = crypto::random_bytes(crypto::kNonceLen);

    Bytes aad(kKeysetWrapAad.begin(), kKeysetWrapAad.end());
    aad.insert(aad.end(), w.id.begin(), w.id.end());

    w.blob = nonce;
    Bytes ct = crypto::aes256gcm_encrypt(master.key.view(), nonce, aad, keys);
    w.blob.insert(w.blob.end(), ct.begin(), ct.end());
    crypto::secure_zero(keys.data(), keys.size());
    return w;
}

Keyset open_keyset(const MasterKey& master, const WrappedKeyset& wrapped) {
    if (wrapped.blob.size() < crypto::kNonceLen + crypto::kTagLen)
        throw AuthError("wrapped keyset too short");

    std::span<const std::uint8_t> nonce(wrapped.blob.data(), crypto::kNonceLen);
    std::span<const std::uint8_t> ct(wrapped.blob.data() + crypto::kNonceLen,
                                     wrapped.blob.size() - crypto::kNonceLen);

    Bytes aad(kKeysetWrapAad.begin(), kKeysetWrapAad.end());
    aad.insert(aad.end(), wrapped.id.begin(), wrapped.id.end());

    Bytes keys = crypto::aes256gcm_decrypt(master.key.view(), nonce, aad, ct);
    if (keys.size() != 2 * crypto::kKeyLen) throw AuthError("wrapped keyset has bad length");

    Keyset ks;
    ks.id = wrapped.id;
    ks.key_tag_key = crypto::SecretBytes(Bytes(keys.begin(), keys.begin() + crypto::kKeyLen));
    ks.value_key = crypto::SecretBytes(Bytes(keys.begin() + crypto::kKeyLen, keys.end()));
    crypto::secure_zero(keys.data(), keys.size());
    return ks;
}

void write_records(const std::filesystem::path& path, const Keyset& keyset,
                   const std::vector<Bytes>& records) {
    Bytes header(kRecordFileMagic.begin(), kRecordFileMagic.end());
    header.push_back(kRecordFileVersion);
    header.insert(header.end(), keyset.id.begin(), keyset.id.end());
    Bytes file_salt = crypto::random_bytes(crypto::kSaltLen);
    header.insert(header.end(), file_salt.begin(), file_salt.end());

    const Bytes header_hash = crypto::sha256(header);

    Bytes out = header;
    auto append_chunk = [&](std::uint32_t seq, std::span<const std::uint8_t> plaintext) {
        Bytes aad = header_hash;
        put_u32be(aad, seq);
        Bytes nonce = crypto::random_bytes(crypto::kNonceLen);
        Bytes ct = crypto::aes256gcm_encrypt(keyset.value_key.view(), nonce, aad, plaintext);
        put_u32be(out, seq);
        out.insert(out.end(), nonce.begin(), nonce.end());
        put_u32be(out, static_cast<std::uint32_t>(ct.size()));
        out.insert(out.end(), ct.begin(), ct.end());
    };

    for (std::size_t i = 0; i < records.size(); ++i) {
        Bytes plaintext;
        plaintext.reserve(records[i].size() + 1);
        plaintext.push_back(kDataChunkPrefix);
        plaintext.insert(plaintext.end(), records[i].begin(), records[i].end());
        append_chunk(static_cast<std::uint32_t>(i), plaintext);
    }
    append_chunk(static_cast<std::uint32_t>(records.size()), {});  // sentinel

    write_file(path, out);
}

std::vector<Bytes> read_records(const std::filesystem::path& path, const Keyset& keyset) {
    const Bytes data = read_file(path);
    const std::size_t header_len = kRecordFileMagic.size() + 1 + keyset.id.size() + crypto::kSaltLen;
    if (data.size() < header_len) throw AuthError("record file shorter than header");
    if (!std::equal(kRecordFileMagic.begin(), kRecordFileMagic.end(), data.begin()))
        throw AuthError("bad record file magic");
    if (data[4] != kRecordFileVersion) throw AuthError("unsupported record file version");
    if (!std::equal(keyset.id.begin(), keyset.id.end(), data.begin() + 5))
        throw AuthError("record file belongs to a different keyset");

    const Bytes header_hash =
        crypto::sha256(std::span<const std::uint8_t>(data.data(), header_len));

    std::vector<Bytes> records;
    std::size_t pos = header_len;
    std::uint32_t expected_seq = 0;
    bool saw_sentinel = false;

    while (pos < data.size()) {
        if (saw_sentinel) throw AuthError(expected_seq, "data after sentinel");
        if (data.size() - pos < 4 + crypto::kNonceLen + 4)
            throw AuthError(expected_seq, "truncated chunk header");

        const std::uint32_t seq = get_u32be(data.data() + pos);
        pos += 4;
        std::span<const std::uint8_t> nonce(data.data() + pos, crypto::kNonceLen);
        pos += crypto::kNonceLen;
        const std::uint32_t ct_len = get_u32be(data.data() + pos);
        pos += 4;

        if (seq != expected_seq) throw AuthError(expected_seq, "chunk out of order");
        if (ct_len < crypto::kTagLen) throw AuthError(expected_seq, "chunk shorter than tag");
        if (ct_len > data.size() - pos) throw AuthError(expected_seq, "truncated chunk body");

        Bytes aad = header_hash;
        put_u32be(aad, seq);
        Bytes plaintext = crypto::aes256gcm_decrypt(
            keyset.value_key.view(), nonce,
            aad, std::span<const std::uint8_t>(data.data() + pos, ct_len));
        pos += ct_len;

        if (plaintext.empty()) {
            saw_sentinel = true;
        } else {
            if (plaintext[0] != kDataChunkPrefix)
                throw AuthError(expected_seq, "bad chunk prefix");
            records.emplace_back(plaintext.begin() + 1, plaintext.end());
        }
        ++expected_seq;
    }
    if (!saw_sentinel) throw AuthError(expected_seq, "missing sentinel chunk");
    return records;
}

std::string KeysetFile::to_json() const {
    json j;
    j["version"] = 1;
    j["kdf"] = {{"salt_hex", to_hex(kdf_salt)}, {"iterations", kdf_iterations}};
    j["keyset_id_hex"] = to_hex(wrapped.id);
    j["wrapped_hex"] = to_hex(wrapped.blob);
    return j.dump(2);
}

KeysetFile KeysetFile::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw IoError("malformed keyset file");
    try {
        KeysetFile f;
        f.kdf_salt = from_hex(j.at("kdf").at("salt_hex").get<std::string>());
        f.kdf_iterations = j.at("kdf").at("iterations").get<int>();
        Bytes id = from_hex(j.at("keyset_id_hex").get<std::string>());
        if (id.size() != f.wrapped.id.size()) throw IoError("bad keyset id length");
        std::copy(id.begin(), id.end(), f.wrapped.id.begin());
        f.wrapped.blob = from_hex(j.at("wrapped_hex").get<std::string>());
        return f;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed keyset file: ") + e.what());
    }
}

void KeysetFile::save(const std::filesystem::path& path) const {
    const std::string text = to_json();
    write_file(path, std::span<const std::uint8_t>(
                         reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

KeysetFile KeysetFile::load(const std::filesystem::path& path) {
    const Bytes raw = read_file(path);
    return from_json(std::string(raw.begin(), raw.end()));
}

std::filesystem::path SecureStore::prefs_path(const std::filesystem::path& dir) {
    return dir / "prefs.ddsr";
}

std::filesystem::path SecureStore::keyset_path(const std::filesystem::path& dir) {
    return dir / "keyset.json";
}

bool SecureStore::exists(const std::filesystem::path& dir) {
    return std::filesystem::exists(keyset_path(dir));
}

SecureStore::SecureStore(std::filesystem::path dir, Keyset keyset)
    : dir_(std::move(dir)), keyset_(std::move(keyset)) {}

SecureStore SecureStore::create(const std::filesystem::path& dir, std::string_view passphrase,
                                const KdfParams& params) {
    if (exists(dir)) throw IoError("store already exists at " + dir.string());
    std::filesystem::create_directories(dir);

    KeysetFile f;
    f.kdf_salt = crypto::random_bytes(crypto::kSaltLen);
    f.kdf_iterations = params.iterations;
    MasterKey master = derive_master_key(passphrase, f.kdf_salt, params);
    f.wrapped = create_keyset(master);
    f.save(keyset_path(dir));

    SecureStore store(dir, open_keyset(master, f.wrapped));
    store.flush();
    return store;
}

SecureStore SecureStore::open(const std::filesystem::path& dir, std::string_view passphrase) {
    KeysetFile f = KeysetFile::load(keyset_path(dir));
    MasterKey master = derive_master_key(passphrase, f.kdf_salt, KdfParams{f.kdf_iterations});
    SecureStore store(dir, open_keyset(master, f.wrapped));
    store.load();
    return store;
}

SecureStore SecureStore::open_or_create(const std::filesystem::path& dir,
                                        std::string_view passphrase, const KdfParams& params) {
    return exists(dir) ? open(dir, passphrase) : create(dir, passphrase, params);
}

Bytes SecureStore::key_tag(std::string_view name) const {
    return crypto::hmac_sha256(
        keyset_.key_tag_key.view(),
        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(name.data()),
                                      name.size()));
}

void SecureStore::load() {
    entries_.clear();
    if (!std::filesystem::exists(prefs_path(dir_))) return;
    for (const Bytes& record : read_records(prefs_path(dir_), keyset_)) {
        // record = key_tag_len u32be | key_tag | nonce | ct
        if (record.size() < 4) throw AuthError("malformed preference record");
        const std::uint32_t tag_len = get_u32be(record.data());
        if (record.size() < 4 + tag_len + crypto::kNonceLen + crypto::kTagLen)
            throw AuthError("malformed preference record");
        Bytes tag(record.begin() + 4, record.begin() + 4 + tag_len);
        ValueCipher vc;
        vc.nonce = Bytes(record.begin() + 4 + tag_len,
                         record.begin() + 4 + tag_len + crypto::kNonceLen);
        vc.ct = Bytes(record.begin() + 4 + tag_len + crypto::kNonceLen, record.end());
        entries_[std::move(tag)] = std::move(vc);  // later records override
    }
}

void SecureStore::flush() const {
    std::vector<Bytes> records;
    records.reserve(entries_.size());
    for (const auto& [tag, vc] : entries_) {
        Bytes record;
        put_u32be(record, static_cast<std::uint32_t>(tag.size()));
        record.insert(record.end(), tag.begin(), tag.end());
        record.insert(record.end(), vc.nonce.begin(), vc.nonce.end());
        record.insert(record.end(), vc.ct.begin(), vc.ct.end());
        records.push_back(std::move(record));
    }
    write_records(prefs_path(dir_), keyset_, records);
}

void SecureStore::put(std::string_view name, const Bytes& value) {
    ValueCipher vc;
    vc.nonce = crypto::random_bytes(crypto::kNonceLen);
    const std::array<std::uint8_t, 1> aad = {kPrefValueAad};
    vc.ct = crypto::aes256gcm_encrypt(keyset_.value_key.view(), vc.nonce, aad, value);
    entries_[key_tag(name)] = std::move(vc);
    flush();
}

Bytes SecureStore::get(std::string_view name) const {
    auto it = entries_.find(key_tag(name));
    if (it == entries_.end()) throw NotFound("preference '" + std::string(name) + "'");
    const std::array<std::uint8_t, 1> aad = {kPrefValueAad};
    return crypto::aes256gcm_decrypt(keyset_.value_key.view(), it->second.nonce, aad,
                                     it->second.ct);
}

bool SecureStore::contains(std::string_view name) const {
    return entries_.count(key_tag(name)) > 0;
}

} // namespace dds
