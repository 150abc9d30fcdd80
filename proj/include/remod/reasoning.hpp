#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "remod/backends.hpp"
#include "remod/domain.hpp"
#include "remod/perception.hpp"
#include "remod/pool.hpp"
#include "remod/prompts.hpp"
#include "remod/retrieval.hpp"

// The agent itself: experience-conditioned three-context prediction, the two
// reflection chains, per-sample training, and final stance inference.

namespace remod {

struct ReasoningEnv {
    BackendSet& backends;
    const PromptLibrary& prompts;
    LabelSet labels;
    std::string fallback_label;
    RetrievalParams mep_retrieval;
    RetrievalParams sep_retrieval;
    bool no_mep = false;
    bool no_sep = false;
    bool no_cot = false;
    PerceptionOptions perception;
};

struct TrainStepTrace {
    std::string sample_id;
    RetrievalResult me_retrieved;
    RetrievalResult se_retrieved;
    std::vector<ContextualPrediction> predictions;  // text, vision, multimodal
    std::vector<bool> correct;                      // parallel to predictions
    std::optional<Insight> modality_insight;
    std::optional<Insight> semantic_insight;
    std::optional<EvolutionRecord> mep_evolution;
    std::optional<EvolutionRecord> sep_evolution;
    KnowledgeBundle bundle;
    std::vector<std::string> warnings;
    std::map<std::string, double> stage_ms;  // wall time per pipeline stage
    std::map<std::string, double> op_ms;     // wall time per backend operation
};

struct InferenceResult {
    std::string label;
    std::string rationale;
    bool parse_fallback = false;
    std::vector<std::uint64_t> me_hit_ids;
    std::vector<std::uint64_t> se_hit_ids;
};

/// Label + rationale pulled out of a backend reply; nullopt when no allowed
/// label could be recovered.
struct ParsedReply {
    std::string label;
    std::string rationale;
};
std::optional<ParsedReply> try_parse_label_reply(const std::string& reply, const LabelSet& labels);

/// Three initial predictions, one per evaluation context, each grounded in
/// the retrieved experience payloads. Contexts are issued as separate calls
/// in the fixed order text, vision, multimodal; when the sample has no
/// image, the vision and multimodal contexts degrade to explicit
/// absent-modality fallbacks without a backend call.
std::vector<ContextualPrediction> intuitive_predict(
    const Sample& sample, const KnowledgeBundle& bundle, const SubImageSet& subimages,
    const std::optional<ImageBuffer>& whole_image, const std::vector<std::string>& me_payloads,
    const std::vector<std::string>& se_payloads, ReasoningEnv& env);

Insight reflect_modality(const Sample& sample, const std::vector<ContextualPrediction>& preds,
                         const std::string& gold, ReasoningEnv& env);

Insight reflect_semantic(const Sample& sample, const std::vector<ContextualPrediction>& preds,
                         const std::string& gold, const std::string& text_knowledge,
                         const std::string& visual_knowledge, ReasoningEnv& env);

/// One training pass over a sample. Backend calls happen in a fixed order,
/// which keeps traces replayable:
///   1. entity extraction, per-entity knowledge lookups, text summary
///   2. caption + visual entities, per-entity lookups, visual summary
///   3. segmentation
///   4. text query embedding, per-sub-image embeddings
///   5. MEP retrieval, SEP retrieval
///   6. intuitive predictions: text, vision, multimodal
///   7. modality reflection, MEP evolution (fusions in hit order)
///   8. semantic reflection, SEP evolution
/// Honors the ablation flags (no_cot skips both reflections and both
/// evolutions; no_mep / no_sep disable that pool's retrieval, reflection and
/// evolution entirely).
TrainStepTrace train_step(const Sample& sample, const std::optional<ImageBuffer>& image,
                          ExperiencePool& mep, ExperiencePool& sep, ReasoningEnv& env);

/// Read-only stance inference: segment, retrieve, compose the final prompt,
/// parse one label. Pools may be null (ablated runs).
InferenceResult infer(const Sample& sample, const std::optional<ImageBuffer>& image,
                      const ExperiencePool* mep, const ExperiencePool* sep, ReasoningEnv& env);

}  // namespace remod
