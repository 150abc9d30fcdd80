#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "remod/backends.hpp"
#include "remod/domain.hpp"

namespace remod {

class ExperiencePool;

/// Bimodal query for one sample: the text-side vector and (when the sample
/// has an image) the mean-pooled sub-image vector.
struct QueryVectors {
    std::optional<std::vector<double>> text;
    std::optional<std::vector<double>> visual;

    bool has_text() const { return text.has_value(); }
    bool has_visual() const { return visual.has_value(); }

    /// Finite components; a present vector must have positive norm.
    void validate() const;
};

struct RelevanceScore {
    std::optional<double> s_text;
    std::optional<double> s_visual;
    double mrs = 0.0;
};

struct RetrievalParams {
    double alpha = 0.7;
    double tau = 0.8;
    std::size_t k = 3;

    void validate() const;
};

struct RetrievalHit {
    std::uint64_t experience_id = 0;
    RelevanceScore score;
};

struct RetrievalResult {
    std::vector<RetrievalHit> hits;
    RetrievalParams params;
};

/// a.b / (|a||b|), clamped to [-1, 1]. Uses the dispatched kernels.
double cosine(std::span<const double> a, std::span<const double> b);

/// Weighted fusion alpha*s_u + (1-alpha)*s_v (both sides present).
double mrs(double s_text, double s_visual, double alpha);

/// Fusion with the absent-modality rule: when only one side is comparable,
/// its score passes through unweighted. Returns nullopt when neither side is.
std::optional<RelevanceScore> fuse_scores(std::optional<double> s_text,
                                          std::optional<double> s_visual, double alpha);

std::vector<double> encode_text_query(const std::string& text, TextEmbedder& embedder);

/// Mean of the sub-image embeddings; whole image as the N=0 fallback;
/// nullopt when there is no image at all. Every image is brought up to
/// min_short_side before embedding.
std::optional<std::vector<double>> encode_visual_query(const SubImageSet& subimages,
                                                       const std::optional<ImageBuffer>& whole_image,
                                                       ImageEmbedder& embedder,
                                                       std::uint32_t min_short_side = 28);

/// Scores every pool entry, keeps mrs > tau (strict), sorts non-increasing
/// with ties broken by insertion order, truncates to k.
RetrievalResult rank_and_filter(const ExperiencePool& pool, const QueryVectors& queries,
                                const RetrievalParams& params);

}  // namespace remod
