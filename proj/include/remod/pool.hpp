#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "remod/domain.hpp"
#include "remod/retrieval.hpp"

namespace remod {

enum class PoolKind {
    mep,  // modality experiences
    sep,  // semantic experiences
};

const char* pool_kind_name(PoolKind k);
InsightKind insight_kind_for(PoolKind k);

/// One key-value memory entry. Keys are frozen at creation; evolution only
/// rewrites payload, revision, sources and the update clock.
struct Experience {
    std::uint64_t id = 0;
    InsightKind kind = InsightKind::modality;
    std::vector<double> key_text;
    std::optional<std::vector<double>> key_visual;
    std::string payload;
    std::uint32_t revision = 0;
    std::vector<std::string> source_samples;
    std::uint64_t created_at = 0;
    std::uint64_t updated_at = 0;
};

/// Insertion-ordered, append-only storage for one experience kind.
class ExperiencePool {
public:
    ExperiencePool(PoolKind kind, std::size_t d_text, std::size_t d_visual);

    PoolKind kind() const { return kind_; }
    std::size_t d_text() const { return d_text_; }
    std::size_t d_visual() const { return d_visual_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::uint64_t step() const { return step_; }
    std::uint64_t next_id() const { return next_id_; }

    const std::vector<Experience>& entries() const { return entries_; }
    const Experience* find(std::uint64_t id) const;

    /// Appends a fresh entry (revision 0) and returns its id. Advances the
    /// logical clock.
    std::uint64_t append(const QueryVectors& keys, std::string payload,
                         const std::string& source_sample);

private:
    friend struct PoolMutator;

    PoolKind kind_;
    std::size_t d_text_;
    std::size_t d_visual_;
    std::vector<Experience> entries_;
    std::uint64_t next_id_ = 0;
    std::uint64_t step_ = 0;
};

struct EvolutionRecord {
    enum class Outcome { appended, updated };

    Outcome outcome = Outcome::appended;
    std::vector<std::uint64_t> ids;  // appended: the new id; updated: every rewritten id
    InsightKind insight_kind = InsightKind::modality;
    RetrievalResult retrieved;
};

/// Synthesizes a prior payload with a new insight into a replacement payload.
/// The production implementation renders the fusion prompt and calls the chat
/// backend; tests inject deterministic functions.
using FuseFn = std::function<std::string(const std::string& prior_payload,
                                         const std::string& insight_text)>;

/// The append-or-overwrite update rule. Retrieves with `queries`; no hits
/// above tau -> the insight is appended as a new entry. Otherwise every hit
/// is re-fused with the insight and overwritten in place (keys unchanged,
/// revision +1). A fuser failure mid-batch keeps the updates already made and
/// raises PartialEvolutionError naming them.
EvolutionRecord evolve(ExperiencePool& pool, const QueryVectors& queries, const Insight& insight,
                       const FuseFn& fuse, const RetrievalParams& params);

/// JSONL persistence: a header line carrying format version, kind, key
/// dimensions and counters, then one entry per line. Vector components
/// survive bit-exactly.
void persist(const ExperiencePool& pool, const std::string& path);
ExperiencePool load_pool(const std::string& path);

/// Structural equality over every field, float components bit-compared.
bool pools_equal(const ExperiencePool& a, const ExperiencePool& b);

}  // namespace remod
