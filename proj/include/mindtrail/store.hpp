#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "mindtrail/model.hpp"
#include "mindtrail/serialize.hpp"

namespace mindtrail {

/// Persistence contract. commit() is atomic per session: after a crash the
/// store holds either the previous or the new document, with exactly the
/// events that were committed alongside it.
class Store {
public:
    virtual ~Store() = default;

    virtual void commit(const Session& session, const std::vector<EventRecord>& new_events) = 0;
    /// Throws UnknownSession or StorageCorrupt.
    virtual StoreRecord load(const std::string& id) const = 0;
    virtual bool exists(const std::string& id) const = 0;
    virtual std::vector<std::string> list() const = 0;
};

class MemoryStore : public Store {
public:
    void commit(const Session& session, const std::vector<EventRecord>& new_events) override;
    StoreRecord load(const std::string& id) const override;
    bool exists(const std::string& id) const override;
    std::vector<std::string> list() const override;

    // Test hook: overwrite the stored document without touching its checksum.
    void tamper_document(const std::string& id, std::string document);

private:
    mutable std::mutex mu_;
    std::map<std::string, StoreRecord> records_;
};

/// One directory; per session `<id>.session` (header line + canonical
/// document, replaced by rename) and `<id>.events.jsonl` (append-only).
class FileStore : public Store {
public:
    /// Creates `dir` when its parent exists; otherwise ConfigError.
    explicit FileStore(std::filesystem::path dir);

    void commit(const Session& session, const std::vector<EventRecord>& new_events) override;
    StoreRecord load(const std::string& id) const override;
    bool exists(const std::string& id) const override;
    std::vector<std::string> list() const override;

    const std::filesystem::path& directory() const noexcept { return dir_; }
    std::filesystem::path document_path(const std::string& id) const;
    std::filesystem::path events_path(const std::string& id) const;

private:
    std::filesystem::path dir_;
};

/// Session ids are restricted to [A-Za-z0-9_-], 1 to 64 characters.
bool valid_session_id(std::string_view id);

}  // namespace mindtrail
