#include "evn/evalkit/experiment.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "evn/core/error.hpp"
#include "evn/core/serialization.hpp"
#include "evn/gateway/json_extract.hpp"
#include "evn/operators/operators.hpp"

namespace evn::evalkit {

using nlohmann::json;

const char* to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::WoE: return "wo_E";
        case Variant::WoV: return "wo_V";
        case Variant::WoN: return "wo_N";
        case Variant::Baseline: return "baseline";
    }
    return "full";
}

Variant variant_from_string(const std::string& s) {
    for (auto v : {Variant::Full, Variant::WoE, Variant::WoV, Variant::WoN, Variant::Baseline})
        if (s == to_string(v)) return v;
    throw Error(ErrorCode::InvalidArgument, "unknown variant: " + s, {{"variant", s}});
}

AblationFlags flags_for(Variant v) {
    switch (v) {
        case Variant::WoE: return {AblationFlag::DisableE};
        case Variant::WoV: return {AblationFlag::DisableV};
        case Variant::WoN: return {AblationFlag::DisableN};
        default: return {};
    }
}

const char* to_string(Metric m) {
    switch (m) {
        case Metric::Novelty: return "novelty";
        case Metric::Feasibility: return "feasibility";
        case Metric::Impact: return "impact";
    }
    return "novelty";
}

ItemRun run_item(const BenchItem& item, int run, const ExperimentConfig& config, const gateway::BackendPtr& backend,
                 const std::vector<gateway::BackendPtr>& judges, std::vector<JudgeScores>* per_judge) {
    ItemRun out{item.item_id, run, std::nullopt, std::nullopt, {}, std::nullopt};
    auto audit = std::make_shared<gateway::AuditLog>();
    gateway::Gateway gw(backend, audit);
    std::optional<json> state_json;
    try {
        if (config.variant == Variant::Baseline) {
            out.proposal = operators::run_baseline(domain_label(item.domain), item.paragraph1, item.paragraph2, gw);
        } else {
            auto session = new_session(item.item_id + "-run" + std::to_string(run),
                                       TacitInput{item.paragraph1, domain_label(item.domain), item.item_id},
                                       config.operators, flags_for(config.variant));
            try {
                operators::run_pipeline(session, gw, operators::batch_answerer(item.paragraph2));
            } catch (...) {
                out.session = session;
                throw;
            }
            out.proposal = session.artifacts.proposal;
            state_json = json(session);
            out.session = std::move(session);
        }
        out.means = score_proposal(*out.proposal, state_json, judges, audit, per_judge);
    } catch (...) {
        out.audit = audit->records();
        throw;
    }
    out.audit = audit->records();
    return out;
}

ExperimentResult run_experiment(const std::vector<BenchItem>& bench, const ExperimentConfig& config,
                                const BackendFactory& pipeline_backend, const std::vector<BackendFactory>& judges) {
    if (config.n_runs < 1) throw Error(ErrorCode::InvalidArgument, "n_runs must be at least 1");
    if (config.parallelism < 1) throw Error(ErrorCode::InvalidArgument, "parallelism must be at least 1");
    if (judges.empty()) throw Error(ErrorCode::InvalidArgument, "at least one judge is required");
    if (bench.empty()) throw Error(ErrorCode::EmptyGroup, "bench has no items");

    struct Slot {
        std::optional<ItemRun> run;
        std::vector<JudgeScores> scores;
        std::optional<ItemFailure> failure;
        std::exception_ptr error;
    };
    const std::size_t n_items = bench.size();
    const std::size_t total = n_items * static_cast<std::size_t>(config.n_runs);
    std::vector<Slot> slots(total);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};

    const auto worker = [&] {
        for (std::size_t idx; !abort && (idx = next++) < total;) {
            const auto& item = bench[idx % n_items];
            const int run = static_cast<int>(idx / n_items);
            auto& slot = slots[idx];
            try {
                std::vector<gateway::BackendPtr> judge_backends;
                for (const auto& f : judges) judge_backends.push_back(f());
                slot.run = run_item(item, run, config, pipeline_backend(), judge_backends, &slot.scores);
            } catch (const Error& e) {
                slot.failure = ItemFailure{item.item_id, run, to_string(e.code()), e.what()};
                slot.error = std::current_exception();
            } catch (const std::exception& e) {
                slot.failure = ItemFailure{item.item_id, run, "Internal", e.what()};
                slot.error = std::current_exception();
            }
            if (slot.failure && !config.skip_failures) abort = true;
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), total);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    ExperimentResult result;
    result.variant = config.variant;
    result.n_runs = config.n_runs;
    std::set<std::string> failed_items;
    for (const auto& s : slots)
        if (s.failure) {
            result.failures.push_back(*s.failure);
            failed_items.insert(s.failure->item_id);
        }
    if (!config.skip_failures)
        for (const auto& s : slots)
            if (s.error) std::rethrow_exception(s.error);

    // Canonical order: run-major, then bench order, then judge order.
    for (std::size_t idx = 0; idx < total; ++idx) {
        auto& s = slots[idx];
        if (!s.run) continue;
        const auto& item = bench[idx % n_items];
        for (const auto& js : s.scores)
            result.raw.push_back({item.item_id, item.domain, item.ambiguity, config.variant, s.run->run, js.judge_id,
                                  js.novelty.score, js.feasibility.score, js.impact.score});
        result.runs.push_back(std::move(*s.run));
    }

    for (auto grouping : {Grouping::Related, Grouping::Unrelated, Grouping::Overall}) {
        for (auto metric : {Metric::Novelty, Metric::Feasibility, Metric::Impact}) {
            std::vector<std::vector<double>> matrix(static_cast<std::size_t>(config.n_runs));
            for (std::size_t idx = 0; idx < total; ++idx) {
                const auto& item = bench[idx % n_items];
                if (failed_items.contains(item.item_id)) continue;
                if (grouping == Grouping::Related && item.ambiguity != Ambiguity::Related) continue;
                if (grouping == Grouping::Unrelated && item.ambiguity != Ambiguity::Unrelated) continue;
                const auto& m = *slots[idx].run->means;
                const double v = metric == Metric::Novelty ? m.novelty : metric == Metric::Feasibility ? m.feasibility : m.impact;
                matrix[idx / n_items].push_back(v);
            }
            if (matrix.front().empty()) continue;  // grouping absent from this bench
            result.summaries[grouping][metric] = aggregate(matrix, grouping);
        }
    }
    return result;
}

void write_raw_csv(const ExperimentResult& result, std::ostream& out) {
    out << "item_id,domain,ambiguity,variant,run,judge_id,novelty,feasibility,impact\n";
    const auto cell = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    for (const auto& r : result.raw)
        out << cell(r.item_id) << ',' << to_string(r.domain) << ',' << to_string(r.ambiguity) << ','
            << to_string(r.variant) << ',' << r.run << ',' << cell(r.judge_id) << ',' << r.novelty << ','
            << r.feasibility << ',' << r.impact << '\n';
}

json summary_json(const ExperimentResult& result) {
    json rows = json::array();
    bool single = false;
    for (const auto& [grouping, metrics] : result.summaries) {
        json row = {{"type", to_string(grouping)}};
        for (const auto& [metric, s] : metrics) {
            row[to_string(metric)] = {{"mean", s.mean}, {"std", s.std}, {"n_runs", s.n_runs}};
            single = single || s.single_run;
        }
        rows.push_back(std::move(row));
    }
    json failures = json::array();
    for (const auto& f : result.failures)
        failures.push_back({{"item_id", f.item_id}, {"run", f.run}, {"code", f.code}, {"message", f.message}});
    return {{"variant", to_string(result.variant)},
            {"n_runs", result.n_runs},
            {"std_kind", "sample"},
            {"single_run", single},
            {"rows", rows},
            {"failures", failures}};
}

void persist_experiment(const ExperimentResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "audit", ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir + ": " + ec.message(), {{"path", dir}});
    {
        std::ofstream csv(fs::path(dir) / "raw_scores.csv");
        if (!csv) throw Error(ErrorCode::Io, "cannot write raw_scores.csv in " + dir);
        write_raw_csv(result, csv);
    }
    {
        std::ofstream summary(fs::path(dir) / "summary.json");
        if (!summary) throw Error(ErrorCode::Io, "cannot write summary.json in " + dir);
        summary << summary_json(result).dump(2) << '\n';
    }
    for (const auto& run : result.runs) {
        std::ofstream log(fs::path(dir) / "audit" / (run.item_id + "_run" + std::to_string(run.run) + ".jsonl"));
        for (const auto& rec : run.audit) log << gateway::safe_dump(json(rec)) << '\n';
    }
}

}  // namespace evn::evalkit
