#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "evn/core/error.hpp"
#include "evn/core/serialization.hpp"
#include "evn/evalkit/experiment.hpp"
#include "evn/evalkit/stats.hpp"
#include "evn/gateway/json_extract.hpp"
#include "evn/gateway/mock_backend.hpp"
#include "evn/operators/operators.hpp"
#include "evn/service/config.hpp"
#include "evn/service/server.hpp"

namespace evn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::string mock;
    std::string config;
    std::string out = "evn-out";
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "file not found: " + path, {{"path", path}});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) {
    auto doc = json::parse(read_text(path), nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::FormatError, "not valid JSON: " + path, {{"path", path}});
    return doc;
}

service::ServiceConfig config_for(const Globals& g) {
    service::ServiceConfig cfg;
    if (!g.config.empty()) cfg = service::load_config(g.config);
    if (!g.mock.empty()) cfg.mock_script = g.mock;
    return cfg;
}

evalkit::BackendFactory backends_for(const Globals& g) {
    const auto cfg = config_for(g);
    if (!cfg.mock_script && cfg.backend.endpoint.empty())
        throw Error(ErrorCode::InvalidArgument, "no backend configured: pass --mock SCRIPT or --config FILE");
    return service::make_backend_factory(cfg);
}

std::string session_id() {
    const auto t = std::chrono::system_clock::now().time_since_epoch().count();
    std::mt19937_64 rng(static_cast<std::uint64_t>(t) ^ std::random_device{}());
    std::ostringstream ss;
    ss << "cli-" << std::hex << (rng() & 0xffffffffffULL);
    return ss.str();
}

/// Owns the per-session output directory and its streaming audit log.
struct SessionOutput {
    fs::path dir;
    std::shared_ptr<gateway::AuditLog> audit;

    SessionOutput(const std::string& root, const std::string& id) : dir(fs::path(root) / id) {
        fs::create_directories(dir);
        audit = std::make_shared<gateway::AuditLog>((dir / "audit.jsonl").string());
    }

    void write_session(const SessionState& s) const {
        std::ofstream(dir / "session.json") << gateway::safe_dump(json(s), 2) << '\n';
    }

    fs::path write_proposal(const Proposal& p) const {
        const auto path = dir / "proposal.md";
        std::ofstream(path) << p.markdown << '\n';
        return path;
    }
};

AblationFlags parse_flags(const std::vector<std::string>& names) {
    AblationFlags flags;
    for (const auto& n : names) flags.insert(ablation_flag_from_string(n));
    return flags;
}

int drive_session(const Globals& g, TacitInput input, const AblationFlags& flags, const operators::Answerer& answer,
                  std::ostream& out) {
    const auto cfg = config_for(g);
    auto backend = backends_for(g)();
    auto session = new_session(session_id(), std::move(input), cfg.operators, flags);
    SessionOutput files(g.out, session.session_id);
    gateway::Gateway gw(backend, files.audit);
    try {
        operators::run_pipeline(session, gw, answer);
    } catch (const Error& e) {
        files.write_session(session);
        auto details = e.details();
        details["audit_log"] = *files.audit->path();
        throw Error(e.code(), e.what(), details);
    }
    files.write_session(session);
    out << files.write_proposal(*session.artifacts.proposal).string() << '\n';
    return 0;
}

std::vector<std::vector<int>> read_rating_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "file not found: " + path, {{"path", path}});
    std::vector<std::vector<int>> columns;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        std::vector<int> row;
        bool numeric = true;
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                row.push_back(std::stoi(c, &used));
                if (c.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw Error(ErrorCode::FormatError, "non-integer rating in " + path + ": " + line, {{"path", path}});
        }
        first = false;
        if (columns.empty()) columns.resize(row.size());
        if (row.size() != columns.size())
            throw Error(ErrorCode::FormatError, "ragged rating rows in " + path, {{"path", path}});
        for (std::size_t i = 0; i < row.size(); ++i) columns[i].push_back(row[i]);
    }
    if (columns.empty()) throw Error(ErrorCode::FormatError, "no ratings in " + path, {{"path", path}});
    return columns;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Research proposal pipeline, evaluation and service tool", "evn"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--mock", g.mock, "Mock backend script (JSON)");
    app.add_option("--config", g.config, "Config file (JSON)");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();

    std::string input_text;
    auto* run_cmd = app.add_subcommand("run", "Interactive session: answer questions on the terminal");
    run_cmd->add_option("--input", input_text, "Initial intuition text (read from stdin when omitted)");
    std::string domain_hint;
    run_cmd->add_option("--domain", domain_hint, "Domain hint");

    std::string input_file, answers_file;
    std::vector<std::string> ablation;
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Batch session with scripted answers");
    pipeline_cmd->add_option("--input", input_file, "File holding the initial intuition")->required();
    pipeline_cmd->add_option("--answers", answers_file, "JSON list of answers")->required();
    pipeline_cmd->add_option("--domain", domain_hint, "Domain hint");
    pipeline_cmd->add_option("--ablation", ablation, "disable_E, disable_V or disable_N")
        ->check(CLI::IsMember({"disable_E", "disable_V", "disable_N"}));

    std::string topic, p1, p2;
    auto* baseline_cmd = app.add_subcommand("baseline", "Two-turn prompt baseline");
    baseline_cmd->add_option("--topic", topic, "Domain topic")->required();
    baseline_cmd->add_option("--p1", p1, "First paragraph")->required();
    baseline_cmd->add_option("--p2", p2, "Second paragraph")->required();

    std::string variant, bench_file;
    int runs = 1;
    int parallelism = 1;
    bool skip_failures = false;
    auto* bench_cmd = app.add_subcommand("bench", "Run a variant over a bench file and score it");
    bench_cmd->add_option("--variant", variant, "full, wo_E, wo_V, wo_N or baseline")
        ->required()
        ->check(CLI::IsMember({"full", "wo_E", "wo_V", "wo_N", "baseline"}));
    bench_cmd->add_option("--bench", bench_file, "Bench JSON file")->required();
    bench_cmd->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--parallelism", parallelism, "Concurrent items")->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_flag("--skip-failures", skip_failures, "Exclude failed items instead of failing the run");

    std::string proposal_file, state_file;
    auto* judge_cmd = app.add_subcommand("judge", "Score a proposal");
    judge_cmd->add_option("--proposal", proposal_file, "Proposal markdown")->required();
    judge_cmd->add_option("--state", state_file, "Session state JSON");

    std::string a_file, b_file;
    bool pairwise = false;
    int scale = 5;
    auto* kappa_cmd = app.add_subcommand("kappa", "Quadratic weighted kappa between rating files (CSV)");
    kappa_cmd->add_option("--a", a_file, "Ratings A (LLM raters with --pairwise)")->required();
    kappa_cmd->add_option("--b", b_file, "Ratings B (human raters with --pairwise)")->required();
    kappa_cmd->add_flag("--pairwise", pairwise, "Mean kappa over every column pair of A x B");
    kappa_cmd->add_option("--scale", scale, "Rating scale size")->check(CLI::Range(2, 100))->capture_default_str();

    auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP service");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*run_cmd) {
            if (input_text.empty()) {
                out << "Describe your intuition: " << std::flush;
                std::getline(in, input_text);
            }
            TacitInput input{input_text, std::nullopt, std::nullopt};
            if (!domain_hint.empty()) input.domain_hint = domain_hint;
            const auto answer = [&](const std::string& question, int) -> std::optional<std::string> {
                out << "\n" << question << "\n> " << std::flush;
                std::string line;
                if (!std::getline(in, line)) return std::nullopt;
                return line;
            };
            return drive_session(g, std::move(input), {}, answer, out);
        }
        if (*pipeline_cmd) {
            TacitInput input{read_text(input_file), std::nullopt, std::nullopt};
            if (!domain_hint.empty()) input.domain_hint = domain_hint;
            const auto doc = read_json(answers_file);
            if (!doc.is_array()) throw Error(ErrorCode::FormatError, "answers file must be a JSON list of strings");
            std::vector<std::string> answers;
            for (const auto& a : doc) {
                if (!a.is_string()) throw Error(ErrorCode::FormatError, "answers file must be a JSON list of strings");
                answers.push_back(a.get<std::string>());
            }
            return drive_session(g, std::move(input), parse_flags(ablation), operators::scripted_answerer(answers), out);
        }
        if (*baseline_cmd) {
            auto backend = backends_for(g)();
            SessionOutput files(g.out, session_id());
            gateway::Gateway gw(backend, files.audit);
            const auto proposal = operators::run_baseline(topic, p1, p2, gw);
            out << files.write_proposal(proposal).string() << '\n';
            return 0;
        }
        if (*bench_cmd) {
            const auto cfg = config_for(g);
            const auto bench = evalkit::load_bench(bench_file);
            evalkit::ExperimentConfig ex;
            ex.variant = evalkit::variant_from_string(variant);
            ex.n_runs = runs;
            ex.parallelism = parallelism;
            ex.skip_failures = skip_failures;
            ex.operators = cfg.operators;
            const auto factory = backends_for(g);
            const auto result = evalkit::run_experiment(bench, ex, factory, {factory});
            evalkit::persist_experiment(result, g.out);
            out << (fs::path(g.out) / "raw_scores.csv").string() << '\n'
                << (fs::path(g.out) / "summary.json").string() << '\n';
            for (const auto& f : result.failures) err << "skipped " << f.item_id << " run " << f.run << ": " << f.message << '\n';
            return 0;
        }
        if (*judge_cmd) {
            Proposal proposal{read_text(proposal_file), Provenance::EvnPipeline};
            std::optional<json> state;
            if (!state_file.empty()) state = read_json(state_file);
            auto backend = backends_for(g)();
            auto audit = std::make_shared<gateway::AuditLog>();
            gateway::Gateway gw(backend, audit);
            out << json(evalkit::judge(proposal, state, gw)).dump() << '\n';
            return 0;
        }
        if (*kappa_cmd) {
            const auto a = read_rating_columns(a_file);
            const auto b = read_rating_columns(b_file);
            if (pairwise) {
                out << json(evalkit::pairwise_mean_kappa(a, b, scale)).dump() << '\n';
            } else {
                const auto r = evalkit::weighted_kappa(a.front(), b.front(), scale);
                out << (r.kappa ? json(*r.kappa).dump() : std::string("undefined")) << '\n';
            }
            return 0;
        }
        if (*serve_cmd) {
            const auto cfg = config_for(g);
            if (auto bad = service::check_config(cfg); !bad.empty())
                throw Error(ErrorCode::InvalidArgument, "invalid config: " + bad.front());
            service::Service svc(cfg, service::make_backend_factory(cfg));
            err << "listening on " << cfg.listen_address << ':' << cfg.port << '\n';
            if (!svc.listen()) throw Error(ErrorCode::Io, "cannot bind " + cfg.listen_address + ":" + std::to_string(cfg.port));
            return 0;
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        if (e.details().contains("audit_log")) err << "audit log: " << e.details()["audit_log"].get<std::string>() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace evn::cli
