#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "remod/config.hpp"
#include "remod/eval.hpp"

// Batch orchestration behind the CLI subcommands: the training pass over a
// corpus, the inference/evaluation pass, and the relevance-threshold sweep.

namespace remod {

struct TrainOutcome {
    std::size_t samples_processed = 0;
    std::size_t samples_skipped = 0;
    std::string mep_path;
    std::string sep_path;
    std::string trace_path;
    std::vector<std::string> warnings;
    std::map<std::string, std::uint64_t> counters;
};

/// One (or `epochs`) sequential passes of train_step over the corpus. Pools
/// and a progress marker are persisted after every sample, so an interrupted
/// run continues from its last completed sample with --resume and ends in
/// the same state an uninterrupted run reaches.
TrainOutcome run_train(const RunConfig& config);

struct EvalOutcome {
    EvaluationReport report;
    std::string predictions_path;
    std::string report_path;
    std::size_t samples = 0;
    std::size_t samples_skipped = 0;
    std::vector<std::string> warnings;
    std::map<std::string, std::uint64_t> counters;
};

/// Inference over the corpus (parallel up to `workers`), predictions JSONL
/// plus the metrics report. Never writes to the pool files.
EvalOutcome run_eval(const RunConfig& config);

struct SweepRow {
    double tau = 0.0;
    double macro_f1 = 0.0;
    std::uint64_t chat_requests = 0;  // non-cached chat calls this row issued
};

struct SweepOutcome {
    std::vector<SweepRow> rows;
    std::string csv_path;
    std::vector<std::string> warnings;
};

/// Re-runs evaluation per threshold (duplicates dropped with a warning) and
/// emits a plot-ready CSV. With the response cache enabled, repeated prompts
/// across thresholds are answered from the cache.
SweepOutcome sweep_tau(const RunConfig& config, const std::vector<double>& taus);

}  // namespace remod
