#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evn/core/types.hpp"
#include "evn/gateway/backend.hpp"

namespace evn::service {

struct SessionRecord {
    SessionState state;
    std::vector<gateway::CompletionRecord> audit;
    std::int64_t revision = 0;
};

void to_json(nlohmann::json& j, const SessionRecord& v);
void from_json(const nlohmann::json& j, SessionRecord& v);

/// Points inside persist() where a fault hook may simulate a process kill.
enum class CrashPoint {
    BeforeWalAppend,
    MidWalAppend,  // half of the WAL line is on disk
    AfterWalAppend,
    MidSnapshotWrite,  // half of the temporary snapshot is on disk
    BeforeSnapshotRename,
    AfterSnapshotRename,
};
const char* to_string(CrashPoint p);

/// Called at every crash point; throwing from it aborts persist() at that
/// point, leaving the files exactly as a kill would.
using FaultHook = std::function<void(CrashPoint)>;

/// Durable per-session storage under <data_dir>/sessions/<id>/:
/// wal.jsonl (one line per accepted revision) and snapshot.json.
///
/// A mutation is acknowledged once its WAL line is fsynced; the snapshot is
/// then replaced atomically (write temp, fsync, rename). load() starts from
/// the snapshot and replays newer WAL lines, so a kill at any point yields
/// either the previous or the new revision, never a mix.
class SessionStore {
public:
    explicit SessionStore(std::string data_dir);

    void set_fault_hook(FaultHook hook);

    /// Persists `record`, whose revision must be exactly one more than the
    /// stored one (1 for a new session). Throws Error{Conflict} otherwise,
    /// Error{StorageFull} or Error{Io} on write failure.
    void persist(const SessionRecord& record);

    /// Latest acknowledged revision. Throws Error{NotFound} for unknown ids
    /// and Error{CorruptRecord} when the files are inconsistent (they are
    /// left untouched for inspection).
    SessionRecord load(const std::string& session_id) const;

    [[nodiscard]] bool exists(const std::string& session_id) const;
    [[nodiscard]] std::vector<std::string> list() const;
    [[nodiscard]] const std::string& data_dir() const { return dir_; }
    [[nodiscard]] std::string session_dir(const std::string& session_id) const;

private:
    std::string dir_;
    FaultHook hook_;
    mutable std::mutex mu_;
};

}  // namespace evn::service
