#include "bernstein/cache.hpp"

#include <openssl/evp.h>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace bernstein {

namespace {

constexpr char kMagic[4] = {'B', 'L', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeader = 4 + 4 + 4 + 8;
constexpr std::size_t kDigest = 32;

std::string sha256_raw(std::string_view data) {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), out, &len, EVP_sha256(), nullptr);
    return std::string(reinterpret_cast<const char*>(out), len);
}

template <class T>
void put(std::string& s, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <class T>
T get(const std::string& s, std::size_t at) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(s[at + i])) << (8 * i);
    return v;
}

}  // namespace

std::filesystem::path resolve_cache_dir(const std::string& flag_value, const std::string& config_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("BERNSTEIN_LAB_CACHE"); env && *env) return env;
    if (!config_value.empty()) return config_value;
    return ".bernstein_cache";
}

ProfileCache::ProfileCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ProfileCache::path_for(const std::string& key) const { return dir_ / (key + ".blpc"); }

std::string ProfileCache::encode(const GrowthProfile& profile) {
    const std::string payload = profile.to_json().dump();
    std::string out(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(profile.precision_bits));
    put<std::uint64_t>(out, payload.size());
    out += payload;
    out += sha256_raw(out);
    return out;
}

GrowthProfile ProfileCache::decode(const std::string& bytes) {
    if (bytes.size() < kHeader + kDigest || bytes.compare(0, 4, kMagic, 4) != 0)
        fail(ErrorCode::CacheCorrupt, "cache entry has a bad header");
    if (get<std::uint32_t>(bytes, 4) != kVersion) fail(ErrorCode::CacheCorrupt, "cache entry has an unknown version");
    const auto len = get<std::uint64_t>(bytes, 12);
    if (len != bytes.size() - kHeader - kDigest) fail(ErrorCode::CacheCorrupt, "cache entry length mismatch");
    const std::string_view body(bytes.data(), kHeader + len);
    if (sha256_raw(body) != bytes.substr(kHeader + len)) fail(ErrorCode::CacheCorrupt, "cache entry checksum mismatch");
    try {
        auto p = GrowthProfile::from_json(nlohmann::json::parse(bytes.substr(kHeader, len)));
        if (p.precision_bits != static_cast<int>(get<std::uint32_t>(bytes, 8)))
            fail(ErrorCode::CacheCorrupt, "cache entry precision disagrees with its payload");
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::CacheCorrupt, std::string("cache payload does not parse: ") + e.what());
    }
}

std::optional<GrowthProfile> ProfileCache::lookup(const std::string& key, int precision_bits) {
    const auto path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        auto p = decode(buf.str());
        if (p.precision_bits != precision_bits) return std::nullopt;
        return p;
    } catch (const Error& e) {
        const std::string msg = "ignoring cache entry " + path.string() + ": " + e.what();
        std::cerr << "warning: " << msg << "\n";
        std::lock_guard lock(mu_);
        warnings_.push_back(msg);
        return std::nullopt;
    }
}

std::vector<std::string> ProfileCache::warnings() const {
    std::lock_guard lock(mu_);
    return warnings_;
}

void ProfileCache::store(const std::string& key, const GrowthProfile& profile) {
    const auto path = path_for(key);
    auto tmp = path;
    tmp += "." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        const auto bytes = encode(profile);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) fail(ErrorCode::InvalidArgument, "cannot write cache entry " + tmp.string());
    }
    // rename is atomic, so readers never see a half-written entry
    std::filesystem::rename(tmp, path);
}

}  // namespace bernstein
