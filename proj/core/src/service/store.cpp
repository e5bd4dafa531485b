#include "evn/service/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "evn/core/error.hpp"
#include "evn/core/serialization.hpp"
#include "evn/gateway/json_extract.hpp"

namespace evn::service {

namespace fs = std::filesystem;
using nlohmann::json;

void to_json(json& j, const SessionRecord& v) {
    j = {{"revision", v.revision}, {"state", v.state}, {"audit", v.audit}};
}

void from_json(const json& j, SessionRecord& v) {
    j.at("revision").get_to(v.revision);
    j.at("state").get_to(v.state);
    v.audit = j.at("audit").get<std::vector<gateway::CompletionRecord>>();
}

const char* to_string(CrashPoint p) {
    switch (p) {
        case CrashPoint::BeforeWalAppend: return "before_wal_append";
        case CrashPoint::MidWalAppend: return "mid_wal_append";
        case CrashPoint::AfterWalAppend: return "after_wal_append";
        case CrashPoint::MidSnapshotWrite: return "mid_snapshot_write";
        case CrashPoint::BeforeSnapshotRename: return "before_snapshot_rename";
        case CrashPoint::AfterSnapshotRename: return "after_snapshot_rename";
    }
    return "unknown";
}

namespace {

bool valid_id(const std::string& id) {
    if (id.empty() || id.size() > 128) return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
    return true;
}

[[noreturn]] void write_failure(const std::string& path, int err) {
    if (err == ENOSPC || err == EDQUOT)
        throw Error(ErrorCode::StorageFull, "no space left writing " + path, {{"path", path}});
    throw Error(ErrorCode::Io, "cannot write " + path + ": " + std::strerror(err), {{"path", path}});
}

class File {
public:
    File(const std::string& path, int flags) : path_(path), fd_(::open(path.c_str(), flags | O_CLOEXEC, 0644)) {
        if (fd_ < 0) write_failure(path, errno);
    }
    ~File() {
        if (fd_ >= 0) ::close(fd_);
    }
    File(const File&) = delete;
    File& operator=(const File&) = delete;

    void write(std::string_view data) {
        while (!data.empty()) {
            const auto n = ::write(fd_, data.data(), data.size());
            if (n < 0) {
                if (errno == EINTR) continue;
                write_failure(path_, errno);
            }
            data.remove_prefix(static_cast<std::size_t>(n));
        }
    }
    void sync() {
        if (::fsync(fd_) != 0) write_failure(path_, errno);
    }

private:
    std::string path_;
    int fd_;
};

void sync_dir(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json wal_line(const SessionRecord& record, std::size_t audit_base) {
    json delta = json::array();
    for (std::size_t i = audit_base; i < record.audit.size(); ++i) delta.push_back(record.audit[i]);
    json payload = {{"revision", record.revision}, {"state", record.state}, {"audit_base", audit_base}, {"audit_delta", delta}};
    const auto body = gateway::safe_dump(payload);
    return {{"checksum", gateway::sha256_hex(body)}, {"payload", std::move(payload)}};
}

std::optional<json> verified_payload(const std::string& line) {
    auto doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("payload") || !doc.contains("checksum")) return std::nullopt;
    if (!doc["checksum"].is_string() || doc["checksum"].get<std::string>() != gateway::sha256_hex(gateway::safe_dump(doc["payload"])))
        return std::nullopt;
    return std::move(doc["payload"]);
}

struct WalScan {
    std::vector<json> payloads;
    std::size_t valid_bytes = 0;
    bool torn_tail = false;
    bool missing_newline = false;
};

/// A bad line is tolerated only as the unterminated last line (a torn append).
WalScan scan_wal(const fs::path& path) {
    WalScan scan;
    const auto text = read_file(path);
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const bool terminated = nl != std::string::npos;
        const auto line = text.substr(pos, (terminated ? nl : text.size()) - pos);
        auto payload = verified_payload(line);
        if (!payload) {
            if (!terminated) {
                scan.torn_tail = true;
                break;
            }
            throw Error(ErrorCode::CorruptRecord, "corrupt WAL line at byte " + std::to_string(pos) + " of " + path.string(),
                        {{"path", path.string()}, {"offset", pos}});
        }
        scan.payloads.push_back(std::move(*payload));
        pos = terminated ? nl + 1 : text.size();
        scan.valid_bytes = pos;
        // A complete line missing only its newline is still an acknowledged append.
        if (!terminated) scan.missing_newline = true;
    }
    return scan;
}

}  // namespace

SessionStore::SessionStore(std::string data_dir) : dir_(std::move(data_dir)) {
    std::error_code ec;
    fs::create_directories(fs::path(dir_) / "sessions", ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create data directory " + dir_ + ": " + ec.message(), {{"path", dir_}});
}

void SessionStore::set_fault_hook(FaultHook hook) {
    std::lock_guard lock(mu_);
    hook_ = std::move(hook);
}

std::string SessionStore::session_dir(const std::string& id) const {
    return (fs::path(dir_) / "sessions" / id).string();
}

bool SessionStore::exists(const std::string& id) const {
    return valid_id(id) && fs::exists(fs::path(session_dir(id)) / "wal.jsonl");
}

std::vector<std::string> SessionStore::list() const {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(fs::path(dir_) / "sessions", ec))
        if (entry.is_directory() && fs::exists(entry.path() / "wal.jsonl")) out.push_back(entry.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

SessionRecord SessionStore::load(const std::string& id) const {
    if (!exists(id)) throw Error(ErrorCode::NotFound, "unknown session " + id, {{"session_id", id}});
    const fs::path dir = session_dir(id);

    SessionRecord record;
    bool have = false;
    if (fs::exists(dir / "snapshot.json")) {
        auto doc = json::parse(read_file(dir / "snapshot.json"), nullptr, false);
        if (doc.is_discarded() || !doc.contains("payload") ||
            doc.value("checksum", std::string{}) != gateway::sha256_hex(gateway::safe_dump(doc["payload"])))
            throw Error(ErrorCode::CorruptRecord, "snapshot of session " + id + " is corrupt",
                        {{"path", (dir / "snapshot.json").string()}});
        try {
            record = doc["payload"].get<SessionRecord>();
        } catch (const std::exception& e) {
            throw Error(ErrorCode::CorruptRecord, "snapshot of session " + id + " does not decode: " + e.what(),
                        {{"path", (dir / "snapshot.json").string()}});
        }
        have = true;
    }

    for (const auto& p : scan_wal(dir / "wal.jsonl").payloads) {
        const auto rev = p.at("revision").get<std::int64_t>();
        if (have && rev <= record.revision) continue;
        const auto expected = have ? record.revision + 1 : 1;
        const auto base = p.at("audit_base").get<std::size_t>();
        if (rev != expected || base != (have ? record.audit.size() : 0))
            throw Error(ErrorCode::CorruptRecord,
                        "WAL of session " + id + " has a gap: revision " + std::to_string(rev) + " after " +
                            std::to_string(expected - 1),
                        {{"path", (dir / "wal.jsonl").string()}, {"revision", rev}});
        try {
            record.state = p.at("state").get<SessionState>();
            for (const auto& r : p.at("audit_delta")) record.audit.push_back(r.get<gateway::CompletionRecord>());
        } catch (const std::exception& e) {
            throw Error(ErrorCode::CorruptRecord, "WAL entry " + std::to_string(rev) + " does not decode: " + e.what(),
                        {{"path", (dir / "wal.jsonl").string()}, {"revision", rev}});
        }
        record.revision = rev;
        have = true;
    }
    if (!have) throw Error(ErrorCode::NotFound, "session " + id + " has no acknowledged revision", {{"session_id", id}});
    return record;
}

void SessionStore::persist(const SessionRecord& record) {
    std::lock_guard lock(mu_);
    const auto& id = record.state.session_id;
    if (!valid_id(id)) throw Error(ErrorCode::InvalidArgument, "invalid session id: " + id);
    const fs::path dir = session_dir(id);
    const auto wal = dir / "wal.jsonl";
    const auto crash = [this](CrashPoint p) {
        if (hook_) hook_(p);
    };

    std::int64_t stored = 0;
    std::size_t audit_base = 0;
    if (fs::exists(wal)) {
        // Drop a torn tail left by an earlier crash before appending.
        const auto scan = scan_wal(wal);
        if (scan.torn_tail) fs::resize_file(wal, scan.valid_bytes);
        if (scan.missing_newline) File(wal.string(), O_WRONLY | O_APPEND).write("\n");
        const auto current = load(id);
        stored = current.revision;
        audit_base = current.audit.size();
    } else {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    }
    if (record.revision != stored + 1)
        throw Error(ErrorCode::Conflict,
                    "revision " + std::to_string(record.revision) + " does not follow stored revision " +
                        std::to_string(stored),
                    {{"session_id", id}, {"stored_revision", stored}, {"revision", record.revision}});
    if (record.audit.size() < audit_base)
        throw Error(ErrorCode::InvalidArgument, "audit log of session " + id + " shrank");

    const auto line = gateway::safe_dump(wal_line(record, audit_base)) + "\n";
    crash(CrashPoint::BeforeWalAppend);
    {
        File f(wal.string(), O_WRONLY | O_CREAT | O_APPEND);
        if (hook_) {
            f.write(std::string_view(line).substr(0, line.size() / 2));
            f.sync();
            crash(CrashPoint::MidWalAppend);
            f.write(std::string_view(line).substr(line.size() / 2));
        } else {
            f.write(line);
        }
        f.sync();
    }
    sync_dir(dir);
    crash(CrashPoint::AfterWalAppend);

    const json payload = record;
    const auto snapshot = gateway::safe_dump(json{{"checksum", gateway::sha256_hex(gateway::safe_dump(payload))},
                                                  {"payload", payload}});
    const auto tmp = dir / "snapshot.json.tmp";
    {
        File f(tmp.string(), O_WRONLY | O_CREAT | O_TRUNC);
        if (hook_) {
            f.write(std::string_view(snapshot).substr(0, snapshot.size() / 2));
            f.sync();
            crash(CrashPoint::MidSnapshotWrite);
            f.write(std::string_view(snapshot).substr(snapshot.size() / 2));
        } else {
            f.write(snapshot);
        }
        f.sync();
    }
    crash(CrashPoint::BeforeSnapshotRename);
    std::error_code ec;
    fs::rename(tmp, dir / "snapshot.json", ec);
    if (ec) throw Error(ErrorCode::Io, "cannot replace snapshot of " + id + ": " + ec.message());
    sync_dir(dir);
    crash(CrashPoint::AfterSnapshotRename);
}

}  // namespace evn::service
