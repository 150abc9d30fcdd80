#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "remod/domain.hpp"

#include <nlohmann/json_fwd.hpp>

namespace remod {

struct PerLabelStats {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvaluationReport {
    std::string tag;
    std::vector<std::string> labels;
    bool has_metrics = false;
    std::uint64_t total = 0;

    std::map<std::string, PerLabelStats> per_label;
    double macro_f1 = 0.0;
    /// confusion[gold index][pred index], indexed by the label-set order.
    std::vector<std::vector<std::uint64_t>> confusion;
    double fallback_rate = 0.0;
    std::map<std::string, double> per_target_macro_f1;
    std::map<std::string, std::uint64_t> backend_calls;

    nlohmann::json to_json() const;
};

/// Unweighted mean of per-label F1 over the FULL label set; a label with
/// P + R = 0 contributes 0. Throws LengthMismatch / UnknownLabel.
double macro_f1(const std::vector<std::string>& preds, const std::vector<std::string>& golds,
                const LabelSet& labels);

/// Assembles the full report. golds empty -> metrics omitted (predictions
/// only). When golds are present their length must match preds.
EvaluationReport build_report(const std::vector<std::string>& preds,
                              const std::vector<std::string>& golds,
                              const std::vector<std::string>& targets,
                              const std::vector<bool>& fallback_flags, const LabelSet& labels,
                              const std::string& tag,
                              const std::map<std::string, std::uint64_t>& backend_calls);

}  // namespace remod
