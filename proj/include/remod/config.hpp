#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "remod/backends.hpp"
#include "remod/domain.hpp"
#include "remod/retrieval.hpp"

namespace remod {

/// One run's worth of knobs. Defaults for alpha, tau and k follow the
/// reference operating point (0.7, 0.8, top-3).
struct RunConfig {
    double alpha = 0.7;
    double tau = 0.8;
    std::size_t k = 3;

    // optional per-pool overrides of the shared triple
    std::optional<double> mep_alpha, mep_tau, sep_alpha, sep_tau;
    std::optional<std::size_t> mep_k, sep_k;

    std::vector<std::string> labels;
    std::string fallback_label;  // empty -> "neutral" if present, else first label

    bool no_mep = false;
    bool no_sep = false;
    bool no_cot = false;

    std::map<BackendRole, BackendDescriptor> backends;

    std::string corpus;
    std::string mep_pool;  // empty -> <out>/mep.jsonl
    std::string sep_pool;  // empty -> <out>/sep.jsonl
    std::string templates_dir;
    std::string out_dir = "out";

    std::size_t epochs = 1;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    bool resume = false;
    bool skip_errors = false;
    bool cache = false;
    std::string cache_file;  // empty -> <out>/response_cache.jsonl
    bool infer_knowledge = false;
    std::string tag = "in-target";

    LabelSet label_set() const;
    std::string resolved_fallback() const;
    RetrievalParams retrieval_params() const;
    RetrievalParams mep_retrieval_params() const;
    RetrievalParams sep_retrieval_params() const;
    std::string mep_path() const;
    std::string sep_path() const;
    std::string cache_path() const;  // empty unless cache is on

    void validate() const;
};

/// Flat key-value file with [sections] per backend role; '#' comments.
/// Every key matches its CLI flag name.
RunConfig parse_config_file(const std::string& path);

/// Applies one key=value pair (section empty for top-level keys). Shared by
/// the file parser and CLI overrides. Throws ConfigError on unknown keys.
void apply_config_kv(RunConfig& config, const std::string& section, const std::string& key,
                     const std::string& value);

}  // namespace remod
