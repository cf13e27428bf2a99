#include "torsionlab/cache.hpp"

#include "torsionlab/domain_json.hpp"
#include "torsionlab/errors.hpp"

#include <openssl/evp.h>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace torsionlab {

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw Error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

nlohmann::json cache_inputs(const std::string& command, const nlohmann::json& domain, const nlohmann::json& config,
                            const std::string& version) {
    return {{"command", command}, {"domain", domain}, {"config", config}, {"version", version}};
}

std::string cache_key(const nlohmann::json& inputs) { return sha256_hex(canonical_json(inputs)); }

ResultCache::ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ValidationError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::optional<nlohmann::json> ResultCache::lookup(const std::string& key, std::vector<std::string>* warnings) const {
    const auto path = dir_ / (key + ".json");
    std::ifstream in(path);
    if (!in) return std::nullopt;
    auto miss = [&](const std::string& why) -> std::optional<nlohmann::json> {
        if (warnings) warnings->push_back("cache entry " + path.string() + " ignored: " + why);
        return std::nullopt;
    };
    nlohmann::json entry;
    try {
        in >> entry;
    } catch (const nlohmann::json::exception& e) {
        return miss(std::string("unreadable (") + e.what() + ")");
    }
    if (!entry.is_object() || !entry.contains("inputs") || !entry.contains("payload") || !entry.contains("key"))
        return miss("missing fields");
    if (entry["key"] != key || cache_key(entry["inputs"]) != key) return miss("key does not match its inputs");
    return entry["payload"];
}

void ResultCache::store(const nlohmann::json& inputs, const nlohmann::json& payload) const {
    const std::string key = cache_key(inputs);
    const auto stamp = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch());
    nlohmann::json entry = {{"key", key},
                            {"inputs", inputs},
                            {"payload", payload},
                            {"version", inputs.value("version", "")},
                            {"timestamp", stamp.count()}};
    const auto final_path = dir_ / (key + ".json");
    std::ostringstream tmp_name;
    tmp_name << key << ".tmp." << ::getpid();
    const auto tmp_path = dir_ / tmp_name.str();
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write cache entry " + tmp_path.string());
        out << entry.dump();
        if (!out.flush()) throw ValidationError("cannot write cache entry " + tmp_path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp_path, final_path, ec);
    if (ec) {
        std::filesystem::remove(tmp_path, ec);
        throw ValidationError("cannot publish cache entry " + final_path.string());
    }
}

CacheLock::CacheLock(const std::filesystem::path& dir) {
    const auto path = dir / ".lock";
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw ValidationError("cannot open cache lock " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw ValidationError("cannot lock cache directory " + dir.string());
    }
}

CacheLock::~CacheLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

}  // namespace torsionlab
