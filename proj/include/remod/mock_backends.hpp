#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "remod/backends.hpp"

// Deterministic offline backends. Every one of these is observationally
// deterministic: identical inputs give identical outputs across runs and
// platforms, which is what the end-to-end golden tests lean on.

namespace remod {

/// Chat backend replaying a JSONL script. Each line:
///   {"match": {"hash": "<fnv1a64 hex of the exact prompt>"}, "reply": "..."}
///   {"match": {"regex": "<ECMAScript regex, searched>"},     "reply": "..."}
/// Rules are evaluated in file order; the first match wins. Regex replies may
/// reference capture groups ($1, $2, ...). Strict mode throws MockMiss when
/// nothing matches; lenient mode answers with a hash-derived canned reply.
/// Note: prompts are multi-line and ECMAScript '.' does not cross newlines;
/// scripts use [\s\S] to span lines.
class ScriptedChat : public ChatBackend {
public:
    enum class Mode { strict, lenient };

    ScriptedChat(std::string script_path, Mode mode);

    using ChatBackend::chat_complete;
    std::string chat_complete(const std::string& prompt,
                              const std::vector<std::vector<std::uint8_t>>& images) override;

    std::size_t rule_count() const { return rules_.size(); }

private:
    struct Rule {
        std::optional<std::string> hash;
        std::optional<std::regex> regex;
        std::string reply;
    };

    std::vector<Rule> rules_;
    Mode mode_;
};

/// Order-invariant bag-of-tokens text embedder: tokens are lowercased,
/// whitespace-split, sorted, and their seeded pseudorandom vectors summed.
/// Sorting makes permutations of the same token multiset bit-identical.
class BagOfTokensEmbedder : public TextEmbedder {
public:
    BagOfTokensEmbedder(std::size_t dimension, std::uint64_t seed);

    std::size_t dimension() const override { return dim_; }
    std::vector<double> embed_text(const std::string& text) override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Whole-string hash embedder: one seeded vector per distinct input string.
class HashTextEmbedder : public TextEmbedder {
public:
    HashTextEmbedder(std::size_t dimension, std::uint64_t seed);

    std::size_t dimension() const override { return dim_; }
    std::vector<double> embed_text(const std::string& text) override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Image embedder seeded by the canonical encoded bytes of the image.
/// Records the short side of every image it embeds so tests can check the
/// minimum-resize contract.
class BytesImageEmbedder : public ImageEmbedder {
public:
    BytesImageEmbedder(std::size_t dimension, std::uint64_t seed);

    std::size_t dimension() const override { return dim_; }
    std::vector<double> embed_image(const ImageBuffer& image) override;

    std::vector<std::uint32_t> seen_short_sides() const;

private:
    std::size_t dim_;
    std::uint64_t seed_;
    mutable std::mutex mu_;
    std::vector<std::uint32_t> short_sides_;
};

/// Segmenter cropping one quadrant per entity, cycling through the four
/// quadrants in entity order.
class QuadrantSegmenter : public SegmentationBackend {
public:
    std::vector<SubImage> segment(const ImageBuffer& image,
                                  const std::vector<std::string>& entities) override;
};

/// Knowledge client reading <dir>/<entity>.txt; non-alphanumeric characters
/// in the entity are mapped to '_'. Missing file -> not found (empty text).
class FixtureKnowledgeClient : public KnowledgeClient {
public:
    explicit FixtureKnowledgeClient(std::string dir);

    Article lookup(const std::string& entity) override;

private:
    std::string dir_;
};

/// Knowledge client that knows nothing. Every lookup is a miss.
class EmptyKnowledgeClient : public KnowledgeClient {
public:
    Article lookup(const std::string& entity) override;
};

}  // namespace remod
