#include "mindtrail/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "mindtrail/error.hpp"

namespace fs = std::filesystem;

namespace mindtrail {

bool valid_session_id(std::string_view id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

namespace {

void require_id(const std::string& id) {
    if (!valid_session_id(id)) throw Error(ErrorCode::UnknownSession, "unknown session '" + id + "'");
}

void verify(const StoreRecord& r, const std::string& id) {
    if (sha256_hex(r.document) != r.checksum) {
        throw Error(ErrorCode::StorageCorrupt, "checksum mismatch for session '" + id + "'");
    }
}

std::string event_line(const EventRecord& e) {
    json j = e;
    return canonical_dump(j) + "\n";
}

// Writes the whole buffer and fsyncs; throws on any failure.
void write_all(int fd, std::string_view data, const fs::path& path) {
    while (!data.empty()) {
        const auto n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorCode::StorageCorrupt, "write failed for " + path.string());
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    if (::fsync(fd) != 0) throw Error(ErrorCode::StorageCorrupt, "fsync failed for " + path.string());
}

void fsync_dir(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Header {
    std::string checksum;
    std::uint64_t event_bytes{0};
    std::uint64_t event_count{0};
};

// "<sha256> <event_bytes> <event_count>\n" followed by the document.
std::pair<Header, std::string> split_document_file(const std::string& raw, const std::string& id) {
    const auto nl = raw.find('\n');
    if (nl == std::string::npos) throw Error(ErrorCode::StorageCorrupt, "missing header in session '" + id + "'");
    std::istringstream hs(raw.substr(0, nl));
    Header h;
    if (!(hs >> h.checksum >> h.event_bytes >> h.event_count) || h.checksum.size() != 64) {
        throw Error(ErrorCode::StorageCorrupt, "unreadable header in session '" + id + "'");
    }
    return {h, raw.substr(nl + 1)};
}

}  // namespace

void MemoryStore::commit(const Session& session, const std::vector<EventRecord>& new_events) {
    require_id(session.id);
    std::lock_guard lk(mu_);
    auto& r = records_[session.id];
    r.document = canonical_session(session);
    r.checksum = sha256_hex(r.document);
    r.events.insert(r.events.end(), new_events.begin(), new_events.end());
}

StoreRecord MemoryStore::load(const std::string& id) const {
    std::lock_guard lk(mu_);
    auto it = records_.find(id);
    if (it == records_.end()) throw Error(ErrorCode::UnknownSession, "unknown session '" + id + "'");
    verify(it->second, id);
    return it->second;
}

bool MemoryStore::exists(const std::string& id) const {
    std::lock_guard lk(mu_);
    return records_.contains(id);
}

std::vector<std::string> MemoryStore::list() const {
    std::lock_guard lk(mu_);
    std::vector<std::string> out;
    for (const auto& [id, r] : records_) out.push_back(id);
    return out;
}

void MemoryStore::tamper_document(const std::string& id, std::string document) {
    std::lock_guard lk(mu_);
    records_.at(id).document = std::move(document);
}

FileStore::FileStore(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    if (fs::is_directory(dir_, ec)) return;
    const auto parent = dir_.has_parent_path() ? dir_.parent_path() : fs::path(".");
    if (!fs::is_directory(parent, ec)) {
        throw Error(ErrorCode::ConfigError, "storage_dir parent does not exist: " + parent.string());
    }
    if (!fs::create_directory(dir_, ec) && !fs::is_directory(dir_)) {
        throw Error(ErrorCode::ConfigError, "cannot create storage_dir " + dir_.string() + ": " + ec.message());
    }
}

fs::path FileStore::document_path(const std::string& id) const { return dir_ / (id + ".session"); }
fs::path FileStore::events_path(const std::string& id) const { return dir_ / (id + ".events.jsonl"); }

void FileStore::commit(const Session& session, const std::vector<EventRecord>& new_events) {
    require_id(session.id);
    const auto doc_path = document_path(session.id);
    const auto ev_path = events_path(session.id);

    Header committed;
    std::error_code ec;
    if (fs::exists(doc_path, ec)) committed = split_document_file(slurp(doc_path), session.id).first;

    // Drop anything a crashed commit appended past the last committed offset.
    if (fs::exists(ev_path, ec) && fs::file_size(ev_path) > committed.event_bytes) {
        fs::resize_file(ev_path, committed.event_bytes);
    }
    std::string lines;
    for (const auto& e : new_events) lines += event_line(e);
    if (!lines.empty() || !fs::exists(ev_path, ec)) {
        const int fd = ::open(ev_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (fd < 0) throw Error(ErrorCode::StorageCorrupt, "cannot open " + ev_path.string());
        try {
            write_all(fd, lines, ev_path);
        } catch (...) {
            ::close(fd);
            throw;
        }
        ::close(fd);
    }

    const auto document = canonical_session(session);
    std::ostringstream body;
    body << sha256_hex(document) << ' ' << committed.event_bytes + lines.size() << ' '
         << committed.event_count + new_events.size() << '\n'
         << document;

    static thread_local std::mt19937_64 rng{std::random_device{}()};
    const auto tmp = dir_ / (session.id + ".session.tmp" + std::to_string(rng() % 1000000000));
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw Error(ErrorCode::StorageCorrupt, "cannot create " + tmp.string());
    try {
        write_all(fd, body.str(), tmp);
    } catch (...) {
        ::close(fd);
        fs::remove(tmp, ec);
        throw;
    }
    ::close(fd);
    fs::rename(tmp, doc_path);
    fsync_dir(dir_);
}

StoreRecord FileStore::load(const std::string& id) const {
    require_id(id);
    const auto doc_path = document_path(id);
    std::error_code ec;
    if (!fs::exists(doc_path, ec)) throw Error(ErrorCode::UnknownSession, "unknown session '" + id + "'");
    auto [header, document] = split_document_file(slurp(doc_path), id);
    StoreRecord r;
    r.document = std::move(document);
    r.checksum = header.checksum;
    verify(r, id);

    const auto events = slurp(events_path(id));
    if (events.size() < header.event_bytes) {
        throw Error(ErrorCode::StorageCorrupt, "event log of session '" + id + "' is shorter than committed");
    }
    std::istringstream in(events.substr(0, header.event_bytes));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            r.events.push_back(json::parse(line).get<EventRecord>());
        } catch (const std::exception& e) {
            throw Error(ErrorCode::StorageCorrupt, "bad event line in session '" + id + "': " + e.what());
        }
    }
    if (r.events.size() != header.event_count) {
        throw Error(ErrorCode::StorageCorrupt, "event count mismatch in session '" + id + "'");
    }
    return r;
}

bool FileStore::exists(const std::string& id) const {
    std::error_code ec;
    return valid_session_id(id) && fs::exists(document_path(id), ec);
}

std::vector<std::string> FileStore::list() const {
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        const auto name = entry.path().filename().string();
        constexpr std::string_view suffix = ".session";
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            out.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace mindtrail
