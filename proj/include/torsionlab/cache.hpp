#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace torsionlab {

[[nodiscard]] std::string sha256_hex(std::string_view data);

/// The hashed inputs of a cached run; the tool version is part of the key.
[[nodiscard]] nlohmann::json cache_inputs(const std::string& command, const nlohmann::json& domain,
                                          const nlohmann::json& config, const std::string& version);
[[nodiscard]] std::string cache_key(const nlohmann::json& inputs);

/// Content-addressed store: one `<key>.json` file per entry.
class ResultCache {
public:
    explicit ResultCache(std::filesystem::path dir);

    /// Corrupt or mismatched entries are misses; the reason is appended to `warnings`.
    [[nodiscard]] std::optional<nlohmann::json> lookup(const std::string& key,
                                                       std::vector<std::string>* warnings = nullptr) const;
    /// Writes to a temporary file and renames it into place.
    void store(const nlohmann::json& inputs, const nlohmann::json& payload) const;

    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

/// Advisory exclusive lock on `<dir>/.lock`, held for the object's lifetime.
class CacheLock {
public:
    explicit CacheLock(const std::filesystem::path& dir);
    ~CacheLock();
    CacheLock(const CacheLock&) = delete;
    CacheLock& operator=(const CacheLock&) = delete;

private:
    int fd_ = -1;
};

}  // namespace torsionlab
