#include "remod/eval.hpp"

#include <nlohmann/json.hpp>

#include "remod/error.hpp"

namespace remod {

namespace {

struct Counts {
    std::map<std::string, PerLabelStats> per_label;
    std::vector<std::vector<std::uint64_t>> confusion;
};

Counts count_confusion(const std::vector<std::string>& preds,
                       const std::vector<std::string>& golds, const LabelSet& labels) {
    if (preds.size() != golds.size() || preds.empty())
        throw Error(Errc::length_mismatch,
                    "need equal, non-zero prediction/gold counts (" +
                        std::to_string(preds.size()) + " vs " + std::to_string(golds.size()) + ")");

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < labels.labels().size(); ++i) index[labels.labels()[i]] = i;

    Counts out;
    out.confusion.assign(labels.size(), std::vector<std::uint64_t>(labels.size(), 0));
    for (const auto& l : labels.labels()) out.per_label[l];

    for (std::size_t i = 0; i < preds.size(); ++i) {
        auto g = index.find(golds[i]);
        auto p = index.find(preds[i]);
        if (g == index.end())
            throw Error(Errc::unknown_label, "gold label '" + golds[i] + "' not in label set");
        if (p == index.end())
            throw Error(Errc::unknown_label, "predicted label '" + preds[i] + "' not in label set");
        out.confusion[g->second][p->second] += 1;
        if (golds[i] == preds[i]) {
            out.per_label[golds[i]].tp += 1;
        } else {
            out.per_label[golds[i]].fn += 1;
            out.per_label[preds[i]].fp += 1;
        }
    }

    for (auto& [label, s] : out.per_label) {
        s.precision = (s.tp + s.fp) == 0 ? 0.0 : double(s.tp) / double(s.tp + s.fp);
        s.recall = (s.tp + s.fn) == 0 ? 0.0 : double(s.tp) / double(s.tp + s.fn);
        s.f1 = (s.precision + s.recall) == 0.0
                   ? 0.0
                   : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    }
    return out;
}

}  // namespace

double macro_f1(const std::vector<std::string>& preds, const std::vector<std::string>& golds,
                const LabelSet& labels) {
    if (labels.empty()) throw Error(Errc::precondition, "label set is empty");
    Counts counts = count_confusion(preds, golds, labels);
    double sum = 0.0;
    for (const auto& l : labels.labels()) sum += counts.per_label[l].f1;
    return sum / double(labels.size());
}

EvaluationReport build_report(const std::vector<std::string>& preds,
                              const std::vector<std::string>& golds,
                              const std::vector<std::string>& targets,
                              const std::vector<bool>& fallback_flags, const LabelSet& labels,
                              const std::string& tag,
                              const std::map<std::string, std::uint64_t>& backend_calls) {
    EvaluationReport report;
    report.tag = tag;
    report.labels = labels.labels();
    report.total = preds.size();
    report.backend_calls = backend_calls;

    std::uint64_t fallbacks = 0;
    for (bool f : fallback_flags) fallbacks += f ? 1 : 0;
    report.fallback_rate = preds.empty() ? 0.0 : double(fallbacks) / double(preds.size());

    if (golds.empty()) return report;  // unlabeled corpus: predictions only

    Counts counts = count_confusion(preds, golds, labels);
    report.has_metrics = true;
    report.per_label = counts.per_label;
    report.confusion = counts.confusion;
    double sum = 0.0;
    for (const auto& l : labels.labels()) sum += counts.per_label[l].f1;
    report.macro_f1 = sum / double(labels.size());

    // Per-target breakdown when the corpus mixes targets.
    std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> by_target;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const std::string& t = i < targets.size() ? targets[i] : std::string("(unknown)");
        by_target[t].first.push_back(preds[i]);
        by_target[t].second.push_back(golds[i]);
    }
    if (by_target.size() > 1) {
        for (const auto& [target, pg] : by_target)
            report.per_target_macro_f1[target] = macro_f1(pg.first, pg.second, labels);
    }
    return report;
}

nlohmann::json EvaluationReport::to_json() const {
    nlohmann::json j;
    j["tag"] = tag;
    j["labels"] = labels;
    j["total"] = total;
    j["fallback_rate"] = fallback_rate;
    j["backend_calls"] = backend_calls;
    if (has_metrics) {
        nlohmann::json metrics;
        metrics["macro_f1"] = macro_f1;
        nlohmann::json per;
        for (const auto& [label, s] : per_label) {
            per[label] = {{"tp", s.tp},
                          {"fp", s.fp},
                          {"fn", s.fn},
                          {"precision", s.precision},
                          {"recall", s.recall},
                          {"f1", s.f1}};
        }
        metrics["per_label"] = per;
        metrics["confusion"] = confusion;
        if (!per_target_macro_f1.empty()) metrics["per_target_macro_f1"] = per_target_macro_f1;
        j["metrics"] = metrics;
    }
    return j;
}

}  // namespace remod
