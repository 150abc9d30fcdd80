#include "remod/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "remod/error.hpp"
#include "remod/kernels.hpp"
#include "remod/pool.hpp"

namespace remod {

void QueryVectors::validate() const {
    auto check = [](const std::vector<double>& v, const char* side) {
        double norm_sq = 0.0;
        for (double x : v) {
            if (!std::isfinite(x))
                throw Error(Errc::precondition, std::string(side) + " query has non-finite component");
            norm_sq += x * x;
        }
        if (norm_sq == 0.0)
            throw Error(Errc::zero_norm_vector, std::string(side) + " query has zero norm");
    };
    if (text) check(*text, "text");
    if (visual) check(*visual, "visual");
}

void RetrievalParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw Error(Errc::alpha_out_of_range, "alpha must lie in [0, 1]");
    if (!(tau >= -1.0 && tau <= 1.0))
        throw Error(Errc::precondition, "tau must lie in [-1, 1]");
    if (k < 1) throw Error(Errc::precondition, "k must be >= 1");
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(Errc::dimension_mismatch, "cosine over " + std::to_string(a.size()) + " vs " +
                                                  std::to_string(b.size()) + " components");
    if (a.empty()) throw Error(Errc::zero_norm_vector, "cosine over empty vectors");
    auto terms = kernels::cosine_terms(a, b);
    if (terms.norm_a_sq == 0.0 || terms.norm_b_sq == 0.0)
        throw Error(Errc::zero_norm_vector, "cosine undefined for zero-norm vector");
    // self-similarity is algebraically 1; keep it exact rather than letting
    // sqrt(x)*sqrt(x) land an ulp away from x
    if (terms.dot == terms.norm_a_sq && terms.dot == terms.norm_b_sq) return 1.0;
    double value = terms.dot / (std::sqrt(terms.norm_a_sq) * std::sqrt(terms.norm_b_sq));
    // rounding can push a hair outside [-1, 1]
    return std::clamp(value, -1.0, 1.0);
}

double mrs(double s_text, double s_visual, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw Error(Errc::alpha_out_of_range, "alpha must lie in [0, 1]");
    if (alpha == 1.0) return s_text;
    if (alpha == 0.0) return s_visual;
    return alpha * s_text + (1.0 - alpha) * s_visual;
}

std::optional<RelevanceScore> fuse_scores(std::optional<double> s_text,
                                          std::optional<double> s_visual, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw Error(Errc::alpha_out_of_range, "alpha must lie in [0, 1]");
    RelevanceScore score;
    score.s_text = s_text;
    score.s_visual = s_visual;
    if (s_text && s_visual) {
        score.mrs = mrs(*s_text, *s_visual, alpha);
    } else if (s_text) {
        score.mrs = *s_text;  // present side passes through unweighted
    } else if (s_visual) {
        score.mrs = *s_visual;
    } else {
        return std::nullopt;
    }
    return score;
}

std::vector<double> encode_text_query(const std::string& text, TextEmbedder& embedder) {
    if (trim(text).empty())
        throw Error(Errc::precondition, "encode_text_query requires non-empty text");
    auto v = embedder.embed_text(text);
    if (v.size() != embedder.dimension())
        throw Error(Errc::dimension_mismatch,
                    "text embedder returned " + std::to_string(v.size()) + " components, declared " +
                        std::to_string(embedder.dimension()));
    return v;
}

std::optional<std::vector<double>> encode_visual_query(const SubImageSet& subimages,
                                                       const std::optional<ImageBuffer>& whole_image,
                                                       ImageEmbedder& embedder,
                                                       std::uint32_t min_short_side) {
    auto embed_one = [&](const ImageBuffer& img) {
        auto v = embedder.embed_image(ensure_min_short_side(img, min_short_side));
        if (v.size() != embedder.dimension())
            throw Error(Errc::dimension_mismatch,
                        "image embedder returned " + std::to_string(v.size()) +
                            " components, declared " + std::to_string(embedder.dimension()));
        return v;
    };

    if (subimages.empty()) {
        if (!whole_image) return std::nullopt;
        return embed_one(*whole_image);
    }
    std::vector<double> acc = embed_one(subimages.items[0].image);
    for (std::size_t i = 1; i < subimages.items.size(); ++i) {
        auto v = embed_one(subimages.items[i].image);
        kernels::add_inplace(acc, v);
    }
    kernels::scale_inplace(acc, 1.0 / double(subimages.items.size()));
    return acc;
}

RetrievalResult rank_and_filter(const ExperiencePool& pool, const QueryVectors& queries,
                                const RetrievalParams& params) {
    params.validate();
    queries.validate();
    if (queries.text && queries.text->size() != pool.d_text())
        throw Error(Errc::dimension_mismatch,
                    "text query dimension " + std::to_string(queries.text->size()) +
                        " vs pool d_text " + std::to_string(pool.d_text()));
    if (queries.visual && queries.visual->size() != pool.d_visual())
        throw Error(Errc::dimension_mismatch,
                    "visual query dimension " + std::to_string(queries.visual->size()) +
                        " vs pool d_visual " + std::to_string(pool.d_visual()));

    RetrievalResult result;
    result.params = params;
    for (const auto& entry : pool.entries()) {
        std::optional<double> s_text;
        if (queries.text && !entry.key_text.empty()) s_text = cosine(*queries.text, entry.key_text);
        std::optional<double> s_visual;
        if (queries.visual && entry.key_visual)
            s_visual = cosine(*queries.visual, *entry.key_visual);
        auto score = fuse_scores(s_text, s_visual, params.alpha);
        if (!score) continue;  // no comparable side
        if (score->mrs > params.tau) result.hits.push_back({entry.id, *score});
    }

    // Entries were scanned in insertion order; stable sort keeps that order
    // within equal scores.
    std::stable_sort(result.hits.begin(), result.hits.end(),
                     [](const RetrievalHit& a, const RetrievalHit& b) {
                         return a.score.mrs > b.score.mrs;
                     });
    if (result.hits.size() > params.k) result.hits.resize(params.k);
    return result;
}

}  // namespace remod
