#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "remod/backends.hpp"
#include "remod/domain.hpp"
#include "remod/prompts.hpp"

// The perception stage: entity extraction, encyclopedia lookups, knowledge
// summarization, captioning, and entity-grounded segmentation.

namespace remod {

/// Every image is brought up to this short side before embedding.
inline constexpr std::uint32_t kMinEmbedShortSide = 28;

enum class KnowledgeSide {
    text,
    visual,
};

struct PerceptionOptions {
    /// Entity extraction + encyclopedia + summaries. Training runs with
    /// knowledge on; inference leaves it off unless configured otherwise.
    bool with_knowledge = true;
    std::uint32_t min_short_side = kMinEmbedShortSide;
};

struct PerceptionResult {
    KnowledgeBundle bundle;
    SubImageSet subimages;
    std::vector<std::string> warnings;  // not-found entities, ungrounded entities
};

std::vector<std::string> extract_text_entities(const std::string& text, const std::string& target,
                                               ChatBackend& chat, const PromptLibrary& prompts,
                                               CallCounters& counters);

/// Encyclopedia lookup. A missing article is data (empty text, found=false),
/// not a failure; transport errors propagate.
KnowledgeClient::Article fetch_knowledge(const std::string& entity, KnowledgeClient& kb,
                                         CallCounters& counters);

/// One summarization call per side; empty raw short-circuits to "" with no
/// backend call.
std::string summarize_knowledge(const std::string& raw, const std::string& target,
                                KnowledgeSide side, ChatBackend& chat,
                                const PromptLibrary& prompts, CallCounters& counters);

std::pair<std::string, std::vector<std::string>> caption_and_extract_visual_entities(
    const ImageBuffer& image, const std::string& target, ChatBackend& chat,
    const PromptLibrary& prompts, CallCounters& counters);

/// Entity-grounded sub-images. Entities the segmenter cannot ground are
/// skipped (warning, not fatal); every crop is upscaled to min_short_side.
SubImageSet ground_entities(const ImageBuffer& image, const std::vector<std::string>& entities,
                            SegmentationBackend& segmenter, CallCounters& counters,
                            std::uint32_t min_short_side, std::vector<std::string>* warnings);

/// The full stage. A sample without an image yields an empty visual side.
PerceptionResult perceive(const Sample& sample, const std::optional<ImageBuffer>& image,
                          BackendSet& backends, const PromptLibrary& prompts,
                          const PerceptionOptions& options);

}  // namespace remod
