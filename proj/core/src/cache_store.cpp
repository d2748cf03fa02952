// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include "relassess/cache_store.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "relassess/digest.hpp"

namespace relassess {

namespace fs = std::filesystem;

namespace {

// Temp files are named "<digest>.<pid>.<counter>.tmp". One belongs to a live
// writer when that pid is still running and is not us.
bool owned_by_live_process(const std::string& name) {
    const auto first = name.find('.');
    const auto second = name.find('.', first + 1);
    if (first == std::string::npos || second == std::string::npos) return false;
    const std::string pid_text = name.substr(first + 1, second - first - 1);
    if (pid_text.empty() || pid_text.find_first_not_of("0123456789") != std::string::npos || pid_text.size() > 9) {
        return false;
    }
    const auto pid = static_cast<pid_t>(std::stol(pid_text));
    if (pid == ::getpid()) return false;
    return ::kill(pid, 0) == 0 || errno == EPERM;
}

constexpr int kFormatVersion = 1;
constexpr std::string_view kTrailerPrefix = "sha256:";
constexpr std::string_view kTempSuffix = ".tmp";

std::string read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_fully(int fd, std::string_view bytes, const fs::path& path) {
    while (!bytes.empty()) {
        const ssize_t n = ::write(fd, bytes.data(), bytes.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError("write to '" + path.string() + "' failed: " + std::strerror(errno));
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
}

void fsync_directory(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

std::string entry_bytes(const CacheEntry& entry, const std::string& digest) {
    json doc{{"schema", to_string(entry.key.step)},
             {"version", kFormatVersion},
             {"digest", digest},
             {"key", entry.key.to_json()},
             {"value", entry.value},
             {"usage", entry.usage},
             {"created_at", entry.created_at},
             {"pipeline_run_id", entry.pipeline_run_id}};
    if (entry.wall_time_ms) doc["wall_time_ms"] = *entry.wall_time_ms;
    const std::string body = canonical_dump(doc);
    return body + "\n" + std::string(kTrailerPrefix) + sha256_hex(body) + "\n";
}

// Returns the JSON line if the checksum trailer verifies.
std::optional<std::string> verified_body(const std::string& bytes) {
    const auto newline = bytes.find('\n');
    if (newline == std::string::npos) return std::nullopt;
    const std::string body = bytes.substr(0, newline);
    const std::string trailer = bytes.substr(newline + 1);
    const std::string expected = std::string(kTrailerPrefix) + sha256_hex(body) + "\n";
    if (trailer != expected) return std::nullopt;
    return body;
}

}  // namespace

std::uint64_t CacheStats::total_entries() const {
    std::uint64_t total = 0;
    for (const auto& [_, n] : entries_per_step) total += n;
    return total;
}

CacheKey CacheKey::make(Step step, std::string model_id, std::string prompt_version, const json& inputs) {
    return CacheKey{step, std::move(model_id), std::move(prompt_version), sha256_hex(canonical_dump(inputs))};
}

json CacheKey::to_json() const {
    return json{{"step", to_string(step)},
                {"model_id", model_id},
                {"prompt_version", prompt_version},
                {"input_digest", input_digest}};
}

CacheKey CacheKey::from_json(const json& j) {
    CacheKey key;
    key.step = require_enum<Step>(j, "step");
    key.model_id = require_string(j, "model_id");
    key.prompt_version = require_string(j, "prompt_version");
    key.input_digest = require_string(j, "input_digest");
    if (!is_hex_digest(key.input_digest)) throw InvalidInput("input_digest is not a 64-hex-char digest");
    return key;
}

std::string CacheKey::digest() const { return sha256_hex(canonical_dump(to_json())); }

void validate_artifact(Step step, const json& value) {
    try {
        switch (step) {
            case Step::query_analysis:
                validate(value.get<QueryAnalysis>());
                break;
            case Step::guideline:
                validate(value.get<GuidelineSet>());
                break;
            case Step::visual_description:
                if (trim(require_string(value, "description")).empty()) throw InvalidInput("empty visual description");
                break;
            case Step::judgment:
                require_enum<RelevanceLabel>(value, "label");
                require_string(value, "reasoning");
                break;
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("artifact does not parse: ") + e.what());
    }
}

CacheStore::CacheStore(fs::path root, StoreOptions options) : root_(std::move(root)), options_(std::move(options)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw IoError("cannot create store root '" + root_.string() + "': " + ec.message());

    const fs::path header_path = root_ / "store.json";
    const json header{{"format", "relassess-cache"}, {"version", kFormatVersion}, {"digest_algorithm", kDigestAlgorithm}};
    for (const auto& file : fs::directory_iterator(root_)) {
        const auto name = file.path().filename().string();
        if (name.ends_with(kTempSuffix) && !owned_by_live_process(name)) fs::remove(file.path(), ec);
    }
    if (!fs::exists(header_path)) {
        // Published like an entry so a crash or a concurrent opener never
        // sees a half-written header.
        const fs::path temp = root_ / ("store." + std::to_string(::getpid()) + ".0" + std::string(kTempSuffix));
        const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
        if (fd < 0) throw IoError("cannot create '" + temp.string() + "': " + std::strerror(errno));
        try {
            write_fully(fd, canonical_dump(header) + "\n", temp);
            if (options_.sync && ::fsync(fd) != 0) throw IoError("fsync of '" + temp.string() + "' failed");
        } catch (...) {
            ::close(fd);
            fs::remove(temp, ec);
            throw;
        }
        ::close(fd);
        const int rc = ::link(temp.c_str(), header_path.c_str());
        const int err = errno;
        fs::remove(temp, ec);
        if (rc != 0 && err != EEXIST) {
            throw IoError("cannot publish store header '" + header_path.string() + "': " + std::strerror(err));
        }
        if (options_.sync) fsync_directory(root_);
    }
    const json existing = json::parse(read_all(header_path), nullptr, false);
    if (existing.is_discarded() || existing.value("digest_algorithm", "") != kDigestAlgorithm ||
        existing.value("version", 0) != kFormatVersion) {
        throw StoreCorruption("store header '" + header_path.string() + "' is unreadable or incompatible");
    }

    for (auto step : all_values<Step>()) {
        const fs::path dir = root_ / std::string(to_string(step));
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
        std::uint64_t count = 0;
        for (const auto& file : fs::recursive_directory_iterator(dir)) {
            if (!file.is_regular_file()) continue;
            const auto name = file.path().filename().string();
            if (name.ends_with(kTempSuffix)) {
                // Debris of an interrupted put; never visible as an entry.
                if (!owned_by_live_process(name)) fs::remove(file.path(), ec);
                continue;
            }
            if (file.path().extension() == ".json") {
                ++count;
                bytes_ += file.file_size();
            }
        }
        entries_[static_cast<std::size_t>(step)] = count;
    }
}

fs::path CacheStore::entry_path(Step step, const std::string& digest) const {
    return root_ / std::string(to_string(step)) / digest.substr(0, 2) / (digest + ".json");
}

std::mutex& CacheStore::stripe(const std::string& digest) {
    return stripes_[std::stoul(digest.substr(0, 2), nullptr, 16) % stripes_.size()];
}

std::optional<CacheEntry> CacheStore::read_entry(const fs::path& path, const std::string& digest) const {
    std::error_code ec;
    if (!fs::exists(path, ec)) return std::nullopt;
    const std::string bytes = read_all(path);
    const auto body = verified_body(bytes);
    if (!body) throw StoreCorruption("checksum mismatch in '" + path.string() + "'");
    const json doc = json::parse(*body, nullptr, false);
    if (doc.is_discarded() || doc.value("digest", "") != digest) {
        throw StoreCorruption("entry '" + path.string() + "' does not match its digest");
    }
    try {
        CacheEntry entry;
        entry.key = CacheKey::from_json(doc.at("key"));
        entry.value = doc.at("value");
        entry.usage = doc.at("usage").get<TokenUsage>();
        entry.created_at = doc.value("created_at", "");
        entry.pipeline_run_id = doc.value("pipeline_run_id", "");
        if (doc.contains("wall_time_ms")) entry.wall_time_ms = doc["wall_time_ms"].get<std::uint64_t>();
        if (entry.key.digest() != digest) throw StoreCorruption("entry key does not hash to '" + digest + "'");
        return entry;
    } catch (const json::exception& e) {
        throw StoreCorruption("entry '" + path.string() + "' is malformed: " + e.what());
    } catch (const InvalidInput& e) {
        throw StoreCorruption("entry '" + path.string() + "' is malformed: " + e.what());
    }
}

std::optional<CacheEntry> CacheStore::get(const CacheKey& key) {
    const std::string digest = key.digest();
    auto entry = read_entry(entry_path(key.step, digest), digest);
    (entry ? hits_ : misses_)++;
    return entry;
}

std::optional<CacheEntry> CacheStore::get_by_digest(Step step, const std::string& key_digest) const {
    if (!is_hex_digest(key_digest)) return std::nullopt;
    return read_entry(entry_path(step, key_digest), key_digest);
}

bool CacheStore::contains(const CacheKey& key) const {
    std::error_code ec;
    return fs::exists(entry_path(key.step, key.digest()), ec);
}

void CacheStore::put(const CacheEntry& entry) {
    validate_artifact(entry.key.step, entry.value);
    const std::string digest = entry.key.digest();
    const fs::path path = entry_path(entry.key.step, digest);

    std::lock_guard lock(stripe(digest));
    if (auto existing = read_entry(path, digest)) {
        if (canonical_dump(existing->value) == canonical_dump(entry.value)) return;
        throw ConflictError("divergent value for existing cache key " + digest + " (" +
                            std::string(to_string(entry.key.step)) + ")");
    }

    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());

    const fs::path temp = path.parent_path() /
                          (digest + "." + std::to_string(::getpid()) + "." + std::to_string(temp_counter_++) +
                           std::string(kTempSuffix));
    const std::string bytes = entry_bytes(entry, digest);
    const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError("cannot create '" + temp.string() + "': " + std::strerror(errno));
    try {
        write_fully(fd, bytes, temp);
        if (options_.sync && ::fsync(fd) != 0) throw IoError("fsync of '" + temp.string() + "' failed");
    } catch (...) {
        ::close(fd);
        fs::remove(temp, ec);
        throw;
    }
    ::close(fd);

    if (options_.before_publish) options_.before_publish(temp);
    // link() never replaces an existing entry, so a writer in another process
    // that published first is detected here instead of being overwritten.
    if (::link(temp.c_str(), path.c_str()) != 0) {
        const int err = errno;
        fs::remove(temp, ec);
        if (err == EEXIST) {
            auto existing = read_entry(path, digest);
            if (existing && canonical_dump(existing->value) == canonical_dump(entry.value)) return;
            throw ConflictError("divergent value for existing cache key " + digest + " (" +
                                std::string(to_string(entry.key.step)) + ")");
        }
        throw IoError("cannot publish '" + path.string() + "': " + std::strerror(err));
    }
    fs::remove(temp, ec);
    if (options_.sync) fsync_directory(path.parent_path());
    entries_[static_cast<std::size_t>(entry.key.step)]++;
    bytes_ += bytes.size();
}

CacheStats CacheStore::stats() const {
    CacheStats s;
    for (auto step : all_values<Step>()) s.entries_per_step[step] = entries_[static_cast<std::size_t>(step)].load();
    s.hit_count = hits_.load();
    s.miss_count = misses_.load();
    s.bytes = bytes_.load();
    return s;
}

IntegrityReport CacheStore::scan() const {
    IntegrityReport report;
    for (auto step : all_values<Step>()) {
        const fs::path dir = root_ / std::string(to_string(step));
        if (!fs::exists(dir)) continue;
        for (const auto& file : fs::recursive_directory_iterator(dir)) {
            if (!file.is_regular_file()) continue;
            const auto name = file.path().filename().string();
            if (name.ends_with(kTempSuffix)) {
                ++report.leftover_temp_files;
                continue;
            }
            if (file.path().extension() != ".json") continue;
            ++report.entries;
            try {
                const auto entry = read_entry(file.path(), file.path().stem().string());
                if (!entry || entry->key.step != step) {
                    report.corrupt.push_back(file.path().string());
                    continue;
                }
                validate_artifact(step, entry->value);
            } catch (const Error&) {
                report.corrupt.push_back(file.path().string());
            }
        }
    }
    return report;
}

}  // namespace relassess
