#pragma once

// On-disk cache of growth profiles. Each entry is one file:
//
//   "BLPC" | u32 version | u32 precision_bits | u64 payload length | payload | SHA-256 of all preceding bytes
//
// with little-endian integers and the profile's JSON text as payload.

#include "bernstein/functions.hpp"

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace bernstein {

/// Cache directory after the override rules: an explicit value wins, then
/// BERNSTEIN_LAB_CACHE, then the configured value, then ./.bernstein_cache.
std::filesystem::path resolve_cache_dir(const std::string& flag_value, const std::string& config_value);

class ProfileCache {
public:
    explicit ProfileCache(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path path_for(const std::string& key) const;

    /// The stored profile iff the key and the precision both match. Corrupt
    /// entries count as misses and leave a warning.
    std::optional<GrowthProfile> lookup(const std::string& key, int precision_bits);
    void store(const std::string& key, const GrowthProfile& profile);

    std::vector<std::string> warnings() const;

    static std::string encode(const GrowthProfile& profile);
    /// Throws CacheCorrupt on a bad magic, length or checksum.
    static GrowthProfile decode(const std::string& bytes);

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::vector<std::string> warnings_;
};

}  // namespace bernstein
