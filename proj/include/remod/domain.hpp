#pragma once

#include <optional>
#include <string>
#include <vector>

#include "remod/image.hpp"

#include <nlohmann/json_fwd.hpp>

namespace remod {

/// The per-dataset stance inventory. Label sets are configuration, not code;
/// each corpus declares its own.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> labels);

    /// Exact-match validation (parse-time contract for corpus labels).
    bool contains(const std::string& value) const;

    /// Case-insensitive match against the set; returns the canonical label.
    /// Used for backend replies, which are free-form text.
    std::optional<std::string> canonical(const std::string& value) const;

    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }

private:
    std::vector<std::string> labels_;
};

/// One (target, text, image, optional gold) instance.
struct Sample {
    std::string id;
    std::string target;
    std::string text;
    std::optional<std::string> image_ref;  // path relative to the corpus file
    std::optional<std::string> gold;

    bool operator==(const Sample&) const = default;
};

enum class ContextKind {
    text_only,
    vision_only,
    multimodal,
};

const char* context_name(ContextKind c);

struct ContextualPrediction {
    ContextKind context = ContextKind::text_only;
    std::string predicted;
    std::string rationale;
    bool parse_fallback = false;   // backend reply needed the fallback parse path
    bool absent_modality = false;  // context could not be evaluated (no image)
};

enum class InsightKind {
    modality,
    semantic,
};

const char* insight_kind_name(InsightKind k);

struct Insight {
    InsightKind kind = InsightKind::modality;
    std::string text;
    std::string source_sample;
};

/// Everything the perception stage distilled for one sample.
struct KnowledgeBundle {
    std::vector<std::string> text_entities;
    std::vector<std::string> visual_entities;
    std::string text_knowledge;
    std::string visual_knowledge;
    std::string caption;
};

/// Entity-grounded image segments, each tagged with the entity it shows.
struct SubImage {
    std::string entity;
    ImageBuffer image;
};

struct SubImageSet {
    std::vector<SubImage> items;

    std::size_t count() const { return items.size(); }
    bool empty() const { return items.empty(); }
};

/// Validates one parsed corpus record. Throws ValidationError listing every
/// offending field. Duplicate-id detection lives in the corpus loader, which
/// sees the whole file.
Sample validate_sample(const nlohmann::json& raw, const LabelSet& labels);

nlohmann::json sample_to_json(const Sample& s);

std::string trim(const std::string& s);

}  // namespace remod
