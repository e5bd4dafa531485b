#include "evn/service/server.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>

#include "evn/core/serialization.hpp"
#include "evn/core/state_machine.hpp"
#include "evn/evalkit/bench.hpp"
#include "evn/gateway/json_extract.hpp"
#include "evn/operators/operators.hpp"

namespace evn::service {

using nlohmann::json;

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return 404;
        case ErrorCode::Conflict:
        case ErrorCode::IllegalTransition:
        case ErrorCode::ElicitationAborted: return 409;
        case ErrorCode::TransportError:
        case ErrorCode::SchemaExhausted:
        case ErrorCode::CacheMiss:
        case ErrorCode::NoSurvivingDirection:
        case ErrorCode::AssumptionCountOutOfRange:
        case ErrorCode::TraceInvalid:
        case ErrorCode::MissingSections: return 502;
        case ErrorCode::StorageFull: return 507;
        case ErrorCode::CorruptRecord:
        case ErrorCode::Io: return 500;
        default: return 422;
    }
}

namespace {

std::string random_id(const char* prefix) {
    static std::mutex mu;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mu);
    static constexpr char hex[] = "0123456789abcdef";
    std::string id = prefix;
    auto v = rng();
    for (int i = 0; i < 16; ++i, v >>= 4) id.push_back(hex[v & 0xF]);
    return id;
}

json error_body(const Error& e) { return {{"code", to_string(e.code())}, {"message", e.what()}, {"details", e.details()}}; }

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(gateway::safe_dump(body), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
    auto doc = json::parse(req.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    return doc;
}

std::optional<std::int64_t> body_revision(const json& body) {
    const auto it = body.find("revision");
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw Error(ErrorCode::InvalidArgument, "revision must be an integer");
    return it->get<std::int64_t>();
}

std::string required_string(const json& body, const char* key) {
    const auto it = body.find(key);
    if (it == body.end() || !it->is_string())
        throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be a string", {{"field", key}});
    return it->get<std::string>();
}

json record_json(const SessionRecord& r, bool in_flight) {
    return {{"session_id", r.state.session_id},
            {"revision", r.revision},
            {"in_flight", in_flight},
            {"state", r.state},
            {"audit", r.audit}};
}

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

/// The artifact a phase was entered with, for /advance responses.
json latest_artifact(const SessionState& s) {
    const auto& a = s.artifacts;
    switch (s.phase.kind) {
        case PhaseKind::Eliciting: {
            const auto q = pending_question(s);
            return q ? json{{"pending_question", *q}} : json(nullptr);
        }
        case PhaseKind::ProfileReady: return {{"profile", opt(a.profile)}};
        case PhaseKind::AnchorsReady: return {{"anchors", opt(a.anchors)}};
        case PhaseKind::DirectionsReady: return {{"directions", opt(a.directions)}};
        case PhaseKind::AssumptionsScored: return {{"assumptions", opt(a.assumptions)}};
        case PhaseKind::Reframed: return {{"triplet", opt(a.triplet)}};
        case PhaseKind::TraceBuilt: return {{"trace", opt(a.trace)}};
        case PhaseKind::NecessityChecked: return {{"necessity", opt(a.necessity)}};
        case PhaseKind::Assembled: return {{"proposal", opt(a.proposal)}};
        case PhaseKind::Failed: return {{"reason", s.phase.reason}};
    }
    return nullptr;
}

AblationFlags parse_flags(const json& body) {
    AblationFlags flags;
    if (const auto it = body.find("ablation"); it != body.end()) {
        if (!it->is_array()) throw Error(ErrorCode::InvalidArgument, "ablation must be an array of flag names");
        for (const auto& f : *it) {
            if (!f.is_string()) throw Error(ErrorCode::InvalidArgument, "ablation flags must be strings");
            try {
                flags.insert(ablation_flag_from_string(f.get<std::string>()));
            } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidArgument, "unknown ablation flag " + f.get<std::string>());
            }
        }
    }
    return flags;
}

}  // namespace

struct Service::Impl {
    struct Live {
        std::mutex mu;
        SessionRecord record;
        gateway::BackendPtr backend;
        std::atomic<bool> busy{false};
    };

    struct Experiment {
        std::string status = "running";
        std::string variant;
        int n_runs = 0;
        std::string output_dir;
        json summary;
        json error;
    };

    ServiceConfig config;
    evalkit::BackendFactory backends;
    SessionStore store;
    httplib::Server server;
    std::thread server_thread;

    std::mutex sessions_mu;
    std::map<std::string, std::shared_ptr<Live>> sessions;

    std::mutex experiments_mu;
    std::map<std::string, Experiment> experiments;
    std::vector<std::thread> experiment_threads;

    Impl(ServiceConfig c, evalkit::BackendFactory b)
        : config(std::move(c)), backends(std::move(b)), store(config.data_dir) {
        if (auto bad = check_config_for_service(); !bad.empty())
            throw Error(ErrorCode::InvalidArgument, "invalid service config: " + bad.front(), {{"violations", bad}});
        probe_data_dir();
        const auto threads = static_cast<std::size_t>(std::max(2, config.parallelism));
        server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
        routes();
    }

    std::vector<std::string> check_config_for_service() const {
        auto bad = check_operator_config(config.operators);
        if (config.parallelism < 1) bad.emplace_back("parallelism must be at least 1");
        return bad;
    }

    void probe_data_dir() const {
        const auto probe = std::filesystem::path(config.data_dir) / ".write_probe";
        std::ofstream out(probe);
        if (!out || !(out << "ok")) throw Error(ErrorCode::Io, "data directory is not writable: " + config.data_dir);
        out.close();
        std::filesystem::remove(probe);
    }

    std::shared_ptr<Live> live(const std::string& id) {
        std::lock_guard lock(sessions_mu);
        if (const auto it = sessions.find(id); it != sessions.end()) return it->second;
        auto l = std::make_shared<Live>();
        l->record = store.load(id);
        l->backend = backends();
        sessions.emplace(id, l);
        return l;
    }

    /// Runs `op` on a copy of the session and commits it as the next
    /// revision. Partial progress and the audit of a failed operator are
    /// committed too, so the error can point at the recorded attempts.
    json mutate(const std::string& id, const json& body,
                const std::function<json(SessionState&, gateway::Gateway&)>& op) {
        auto l = live(id);
        bool expected = false;
        if (!l->busy.compare_exchange_strong(expected, true))
            throw Error(ErrorCode::Conflict, "an operator is already in flight for session " + id,
                        {{"session_id", id}, {"reason", "in_flight"}});
        struct Release {
            std::atomic<bool>& flag;
            ~Release() { flag = false; }
        } release{l->busy};

        SessionRecord current;
        {
            std::lock_guard lock(l->mu);
            current = l->record;
        }
        if (const auto rev = body_revision(body); rev && *rev != current.revision)
            throw Error(ErrorCode::Conflict,
                        "stale revision " + std::to_string(*rev) + "; current is " + std::to_string(current.revision),
                        {{"session_id", id}, {"reason", "revision"}, {"current_revision", current.revision},
                         {"phase", to_string(current.state.phase.kind)}});

        auto audit = std::make_shared<gateway::AuditLog>();
        gateway::Gateway gw(l->backend, audit);
        SessionState state = current.state;
        json result;
        std::exception_ptr failure;
        try {
            result = op(state, gw);
        } catch (...) {
            failure = std::current_exception();
        }

        const auto calls = audit->records();
        const bool changed = !(state == current.state) || !calls.empty();
        SessionRecord next = current;
        if (changed) {
            next.state = std::move(state);
            next.audit.insert(next.audit.end(), calls.begin(), calls.end());
            next.revision = current.revision + 1;
            store.persist(next);
            std::lock_guard lock(l->mu);
            l->record = next;
        }
        if (failure) {
            try {
                std::rethrow_exception(failure);
            } catch (const Error& e) {
                json details = e.details().is_object() ? e.details() : json{{"detail", e.details()}};
                details["audit"] = {{"session_id", id},
                                    {"revision", next.revision},
                                    {"first_record", current.audit.size()},
                                    {"records", calls.size()}};
                throw Error(e.code(), e.what(), details);
            }
        }
        if (!result.is_object()) result = json::object();
        result["session_id"] = id;
        result["revision"] = next.revision;
        result["phase"] = next.state.phase;
        return result;
    }

    json create_session(const json& body) {
        TacitInput input;
        const auto in = body.find("input");
        if (in == body.end()) throw Error(ErrorCode::InvalidArgument, "input is required", {{"field", "input"}});
        if (in->is_string()) {
            input.text = in->get<std::string>();
        } else if (in->is_object()) {
            input.text = required_string(*in, "text");
            if (in->contains("domain_hint") && (*in)["domain_hint"].is_string())
                input.domain_hint = (*in)["domain_hint"].get<std::string>();
        } else {
            throw Error(ErrorCode::InvalidArgument, "input must be a string or an object", {{"field", "input"}});
        }
        if (const auto it = body.find("domain_hint"); it != body.end() && it->is_string()) input.domain_hint = it->get<std::string>();

        json ops = config.operators;
        if (const auto it = body.find("operators"); it != body.end()) {
            if (!it->is_object()) throw Error(ErrorCode::InvalidArgument, "operators must be an object");
            ops.merge_patch(*it);
        }
        OperatorConfig op_config;
        try {
            op_config = ops.get<OperatorConfig>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidArgument, std::string("invalid operator overrides: ") + e.what());
        }
        if (auto bad = check_operator_config(op_config); !bad.empty())
            throw Error(ErrorCode::InvalidArgument, "invalid operator overrides: " + bad.front(), {{"violations", bad}});

        const auto id = random_id("s-");
        auto state = new_session(id, input, op_config, parse_flags(body));
        auto l = std::make_shared<Live>();
        l->backend = backends();
        auto audit = std::make_shared<gateway::AuditLog>();
        gateway::Gateway gw(l->backend, audit);
        std::exception_ptr failure;
        if (!state.ablation_flags.contains(AblationFlag::DisableE)) {
            try {
                operators::ask_question(state, gw);
            } catch (...) {
                failure = std::current_exception();
            }
        }
        l->record = SessionRecord{state, audit->records(), 1};
        store.persist(l->record);
        {
            std::lock_guard lock(sessions_mu);
            sessions.emplace(id, l);
        }
        if (failure) {
            try {
                std::rethrow_exception(failure);
            } catch (const Error& e) {
                json details = e.details();
                details["audit"] = {{"session_id", id}, {"revision", 1}, {"first_record", 0}};
                throw Error(e.code(), e.what(), details);
            }
        }
        const auto q = pending_question(state);
        return {{"session_id", id},
                {"first_question", q ? json(*q) : json(nullptr)},
                {"revision", 1},
                {"phase", state.phase}};
    }

    json answer(const std::string& id, const json& body) {
        const auto text = required_string(body, "text");
        return mutate(id, body, [&](SessionState& s, gateway::Gateway& gw) -> json {
            operators::record_answer(s, text);
            if (s.phase.turns_completed < s.config_snapshot.elicitation_turns) {
                operators::ask_question(s, gw);
                return {{"next_question", *pending_question(s)}, {"phase_advanced", false}};
            }
            operators::formalize_profile(s, gw);
            return {{"phase_advanced", true}, {"profile", opt(s.artifacts.profile)}};
        });
    }

    json advance(const std::string& id, const json& body) {
        const auto abstracts = body.value("abstracts", std::string{});
        return mutate(id, body, [&](SessionState& s, gateway::Gateway& gw) -> json {
            operators::advance_one(s, gw, abstracts);
            return {{"artifact", latest_artifact(s)}, {"artifacts", s.artifacts}};
        });
    }

    json select_direction(const std::string& id, const json& body) {
        const auto direction = required_string(body, "direction_id");
        return mutate(id, body, [&](SessionState& s, gateway::Gateway&) -> json {
            s = evn::advance(s, event::DirectionSelected{direction});
            return {{"directions", opt(s.artifacts.directions)}};
        });
    }

    json cancel(const std::string& id, const json& body) {
        return mutate(id, body, [&](SessionState& s, gateway::Gateway&) -> json {
            s = evn::advance(s, event::OperatorFailed{"user cancel"});
            return json::object();
        });
    }

    json get_session(const std::string& id) {
        auto l = live(id);
        std::lock_guard lock(l->mu);
        return record_json(l->record, l->busy.load());
    }

    json get_proposal(const std::string& id) {
        auto l = live(id);
        std::lock_guard lock(l->mu);
        const auto& s = l->record.state;
        if (s.phase.kind != PhaseKind::Assembled || !s.artifacts.proposal)
            throw Error(ErrorCode::Conflict, "proposal is not ready", {{"phase", to_string(s.phase.kind)}, {"session_id", id}});
        return {{"session_id", id},
                {"markdown", s.artifacts.proposal->markdown},
                {"provenance", to_string(s.artifacts.proposal->provenance)},
                {"section_headers", s.artifacts.proposal->section_headers()}};
    }

    json start_experiment(const json& body) {
        evalkit::ExperimentConfig cfg;
        cfg.variant = evalkit::variant_from_string(required_string(body, "variant"));
        const auto bench_path = required_string(body, "bench_path");
        cfg.n_runs = body.value("n_runs", 1);
        cfg.parallelism = body.value("parallelism", config.parallelism);
        cfg.skip_failures = body.value("skip_failures", false);
        cfg.operators = config.operators;
        if (cfg.n_runs < 1) throw Error(ErrorCode::InvalidArgument, "n_runs must be at least 1");
        if (cfg.parallelism < 1) throw Error(ErrorCode::InvalidArgument, "parallelism must be at least 1");
        auto bench = evalkit::load_bench(bench_path);

        const auto id = random_id("x-");
        const auto dir = (std::filesystem::path(config.data_dir) / "experiments" / id).string();
        {
            std::lock_guard lock(experiments_mu);
            experiments[id] = Experiment{"running", evalkit::to_string(cfg.variant), cfg.n_runs, dir, nullptr, nullptr};
            experiment_threads.emplace_back([this, id, dir, cfg, bench = std::move(bench)] {
                Experiment done;
                try {
                    auto result = evalkit::run_experiment(bench, cfg, backends, {backends});
                    evalkit::persist_experiment(result, dir);
                    done.status = "completed";
                    done.summary = evalkit::summary_json(result);
                } catch (const Error& e) {
                    done.status = "failed";
                    done.error = error_body(e);
                } catch (const std::exception& e) {
                    done.status = "failed";
                    done.error = {{"code", "Internal"}, {"message", e.what()}, {"details", json::object()}};
                }
                std::lock_guard lock(experiments_mu);
                auto& x = experiments[id];
                x.status = done.status;
                x.summary = done.summary;
                x.error = done.error;
            });
        }
        return {{"experiment_id", id}, {"status", "running"}};
    }

    json get_experiment(const std::string& id) {
        std::lock_guard lock(experiments_mu);
        const auto it = experiments.find(id);
        if (it == experiments.end()) throw Error(ErrorCode::NotFound, "unknown experiment " + id, {{"experiment_id", id}});
        const auto& x = it->second;
        return {{"experiment_id", id}, {"status", x.status},   {"variant", x.variant}, {"n_runs", x.n_runs},
                {"output_dir", x.output_dir}, {"summary", x.summary}, {"error", x.error}};
    }

    template <typename F>
    httplib::Server::Handler handler(int status, F fn) {
        return [this, status, fn](const httplib::Request& req, httplib::Response& res) {
            try {
                reply(res, status, fn(req));
            } catch (const Error& e) {
                reply(res, http_status(e.code()), error_body(e));
            } catch (const std::exception& e) {
                reply(res, 500, {{"code", "Internal"}, {"message", e.what()}, {"details", json::object()}});
            }
        };
    }

    void routes() {
        const std::string sid = "/sessions/([A-Za-z0-9_-]+)";
        server.Post("/sessions", handler(201, [this](const auto& req) { return create_session(parse_body(req)); }));
        server.Get("/sessions", handler(200, [this](const auto&) { return json{{"sessions", store.list()}}; }));
        server.Post(sid + "/answer", handler(200, [this](const auto& req) { return answer(req.matches[1], parse_body(req)); }));
        server.Post(sid + "/advance", handler(200, [this](const auto& req) { return advance(req.matches[1], parse_body(req)); }));
        server.Post(sid + "/select_direction",
                    handler(200, [this](const auto& req) { return select_direction(req.matches[1], parse_body(req)); }));
        server.Post(sid + "/cancel", handler(200, [this](const auto& req) { return cancel(req.matches[1], parse_body(req)); }));
        server.Get(sid + "/proposal", handler(200, [this](const auto& req) { return get_proposal(req.matches[1]); }));
        server.Get(sid, handler(200, [this](const auto& req) { return get_session(req.matches[1]); }));
        server.Post("/experiments", handler(202, [this](const auto& req) { return start_experiment(parse_body(req)); }));
        server.Get("/experiments/([A-Za-z0-9_-]+)",
                   handler(200, [this](const auto& req) { return get_experiment(req.matches[1]); }));
        server.Get("/health", handler(200, [](const auto&) { return json{{"status", "ok"}}; }));
        server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            const auto origin = req.get_header_value("Origin");
            if (origin.empty()) return;
            const auto& allowed = config.cors_origins;
            if (std::find(allowed.begin(), allowed.end(), origin) == allowed.end() &&
                std::find(allowed.begin(), allowed.end(), "*") == allowed.end())
                return;
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Vary", "Origin");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        });
        server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
            if (!res.body.empty()) return;
            if (res.status == 404)
                reply(res, 404, {{"code", "NotFound"}, {"message", "no route for " + req.path}, {"details", json::object()}});
        });
    }
};

Service::Service(ServiceConfig config, evalkit::BackendFactory backends)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(backends))) {}

Service::~Service() {
    stop();
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(impl_->experiments_mu);
        threads.swap(impl_->experiment_threads);
    }
    for (auto& t : threads)
        if (t.joinable()) t.join();
}

bool Service::listen() { return impl_->server.listen(impl_->config.listen_address, impl_->config.port); }

int Service::start_background() {
    const int port = impl_->server.bind_to_any_port(impl_->config.listen_address);
    if (port < 0) throw Error(ErrorCode::Io, "cannot bind " + impl_->config.listen_address);
    impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void Service::stop() {
    impl_->server.stop();
    if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

SessionStore& Service::store() { return impl_->store; }
const ServiceConfig& Service::config() const { return impl_->config; }

}  // namespace evn::service
