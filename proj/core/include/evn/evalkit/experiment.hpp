#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evn/core/types.hpp"
#include "evn/evalkit/bench.hpp"
#include "evn/evalkit/judge.hpp"
#include "evn/evalkit/stats.hpp"
#include "evn/gateway/backend.hpp"

namespace evn::evalkit {

enum class Variant { Full, WoE, WoV, WoN, Baseline };
const char* to_string(Variant v);
/// Throws Error{InvalidArgument}.
Variant variant_from_string(const std::string& s);
AblationFlags flags_for(Variant v);

enum class Metric { Novelty, Feasibility, Impact };
const char* to_string(Metric m);

/// Backends are created per (item, run) so scripted mocks start from a clean
/// cursor state regardless of scheduling.
using BackendFactory = std::function<gateway::BackendPtr()>;

struct ExperimentConfig {
    Variant variant = Variant::Full;
    int n_runs = 1;
    int parallelism = 1;
    bool skip_failures = false;
    OperatorConfig operators;
};

struct RawScore {
    std::string item_id;
    Domain domain = Domain::PrognosisPrediction;
    Ambiguity ambiguity = Ambiguity::Related;
    Variant variant = Variant::Full;
    int run = 0;
    std::string judge_id;
    int novelty = 0;
    int feasibility = 0;
    int impact = 0;
};

struct ItemFailure {
    std::string item_id;
    int run = 0;
    std::string code;
    std::string message;
};

/// One executed (item, run): the session (pipeline variants), the proposal
/// and every model call made for it, judges included.
struct ItemRun {
    std::string item_id;
    int run = 0;
    std::optional<SessionState> session;
    std::optional<Proposal> proposal;
    std::vector<gateway::CompletionRecord> audit;
    std::optional<MetricMeans> means;
};

struct ExperimentResult {
    Variant variant = Variant::Full;
    int n_runs = 0;
    std::vector<RawScore> raw;
    std::map<Grouping, std::map<Metric, ScoreSummary>> summaries;
    std::vector<ItemFailure> failures;
    std::vector<ItemRun> runs;
};

/// Executes the variant for every item and run, scores every proposal with
/// every judge and aggregates per grouping. Fails on the first item error
/// unless `skip_failures` is set, in which case an item that fails in any run
/// is excluded from every run's aggregate.
ExperimentResult run_experiment(const std::vector<BenchItem>& bench, const ExperimentConfig& config,
                                const BackendFactory& pipeline_backend, const std::vector<BackendFactory>& judges);

/// Runs one item once: pipeline (or baseline) then judging.
ItemRun run_item(const BenchItem& item, int run, const ExperimentConfig& config, const gateway::BackendPtr& backend,
                 const std::vector<gateway::BackendPtr>& judges, std::vector<JudgeScores>* per_judge = nullptr);

/// CSV with header item_id,domain,ambiguity,variant,run,judge_id,novelty,feasibility,impact.
void write_raw_csv(const ExperimentResult& result, std::ostream& out);

/// {"variant","n_runs","std_kind","single_run","rows":[{"type","novelty":{"mean","std"},...}],"failures"}.
nlohmann::json summary_json(const ExperimentResult& result);

/// Writes raw_scores.csv, summary.json and audit/<item>_run<r>.jsonl under `dir`.
void persist_experiment(const ExperimentResult& result, const std::string& dir);

}  // namespace evn::evalkit
