#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "remod/domain.hpp"
#include "remod/image.hpp"

// Contracts for every external model/service the pipeline talks to. The
// paper's concrete deployments (an MLLM backbone, a text encoder, an
// open-vocabulary segmenter, an encyclopedia) all sit behind these seams;
// scripted mocks implement the same contracts for offline runs and tests.

namespace remod {

enum class BackendRole {
    chat,
    text_embedder,
    image_embedder,
    segmenter,
    knowledge,
};

const char* role_name(BackendRole role);

struct BackendDescriptor {
    BackendRole role = BackendRole::chat;
    std::string endpoint;        // http(s)://..., mock:..., fixture:<dir>
    int timeout_ms = 30000;
    int max_retries = 2;
    int backoff_ms = 100;        // base for exponential backoff
    std::size_t dimension = 0;   // embedders only
    double temperature = 0.0;    // chat only; 0 keeps remote decoding deterministic

    void validate() const;
};

/// Thread-safe call counters, keyed by "<role-or-stage>.<operation>".
/// Exposed to tests and to the CLI cost report. Wall time accumulates under
/// the same keys so per-sample traces can diff before/after.
class CallCounters {
public:
    void bump(const std::string& key, std::uint64_t n = 1);
    std::uint64_t count(const std::string& key) const;
    std::map<std::string, std::uint64_t> snapshot() const;

    void add_ms(const std::string& key, double ms);
    std::map<std::string, double> ms_snapshot() const;

    void reset();

private:
    mutable std::mutex mu_;
    std::map<std::string, std::uint64_t> counts_;
    std::map<std::string, double> ms_;
};

/// Bumps `key` on construction, accumulates the scope's wall time on exit.
class ScopedOp {
public:
    ScopedOp(CallCounters& counters, std::string key);
    ~ScopedOp();
    ScopedOp(const ScopedOp&) = delete;
    ScopedOp& operator=(const ScopedOp&) = delete;

private:
    CallCounters& counters_;
    std::string key_;
    std::chrono::steady_clock::time_point start_;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    /// prompt plus optional encoded image attachments -> reply text.
    virtual std::string chat_complete(const std::string& prompt,
                                      const std::vector<std::vector<std::uint8_t>>& images) = 0;

    std::string chat_complete(const std::string& prompt) { return chat_complete(prompt, {}); }
};

class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<double> embed_text(const std::string& text) = 0;
};

class ImageEmbedder {
public:
    virtual ~ImageEmbedder() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<double> embed_image(const ImageBuffer& image) = 0;
};

class SegmentationBackend {
public:
    virtual ~SegmentationBackend() = default;
    /// One sub-image per entity the model could ground; ungroundable
    /// entities are simply absent from the result.
    virtual std::vector<SubImage> segment(const ImageBuffer& image,
                                          const std::vector<std::string>& entities) = 0;
};

class KnowledgeClient {
public:
    struct Article {
        std::string text;
        bool found = false;
    };

    virtual ~KnowledgeClient() = default;
    virtual Article lookup(const std::string& entity) = 0;
};

/// One wired set of backends plus the shared counter registry.
struct BackendSet {
    std::unique_ptr<ChatBackend> chat;
    std::unique_ptr<TextEmbedder> text_embedder;
    std::unique_ptr<ImageEmbedder> image_embedder;
    std::unique_ptr<SegmentationBackend> segmenter;
    std::unique_ptr<KnowledgeClient> knowledge;
    std::shared_ptr<CallCounters> counters = std::make_shared<CallCounters>();
};

/// Builds a BackendSet from descriptors. Endpoint schemes:
///   chat:           mock:<script.jsonl>[?mode=strict|lenient], http(s)://host
///   text_embedder:  mock:bag[?seed=N], mock:hash[?seed=N], http(s)://host
///   image_embedder: mock:bytes[?seed=N], http(s)://host
///   segmenter:      mock:quadrant, http(s)://host
///   knowledge:      fixture:<dir>, mock:empty, http(s)://host
/// `cache_path`, when non-empty, wraps chat in the on-disk response cache.
BackendSet make_backend_set(const std::map<BackendRole, BackendDescriptor>& descriptors,
                            std::uint64_t seed, const std::string& cache_path = "");

/// Chat decorator: replays identical requests from an on-disk JSONL cache
/// instead of re-issuing them. Keyed by a hash of prompt and attachments.
class CachingChat : public ChatBackend {
public:
    CachingChat(std::unique_ptr<ChatBackend> inner, std::string path);

    using ChatBackend::chat_complete;
    std::string chat_complete(const std::string& prompt,
                              const std::vector<std::vector<std::uint8_t>>& images) override;

private:
    std::unique_ptr<ChatBackend> inner_;
    std::string path_;
    std::mutex mu_;
    std::map<std::string, std::string> entries_;
};

/// Chat decorator bumping "<prefix>.requests" per call.
class CountingChat : public ChatBackend {
public:
    CountingChat(std::unique_ptr<ChatBackend> inner, std::shared_ptr<CallCounters> counters,
                 std::string prefix);

    using ChatBackend::chat_complete;
    std::string chat_complete(const std::string& prompt,
                              const std::vector<std::vector<std::uint8_t>>& images) override;

private:
    std::unique_ptr<ChatBackend> inner_;
    std::shared_ptr<CallCounters> counters_;
    std::string prefix_;
};

}  // namespace remod
