#pragma once

#include <string>

#include "remod/backends.hpp"

// HTTP adapters for real deployments. Wire contracts (JSON bodies):
//   POST /chat    {"prompt": str, "images": [b64, ...]}      -> {"text": str}
//   POST /embed   {"input": str}                             -> {"vector": [num, ...]}
//   POST /segment {"image": b64, "labels": [str, ...]}       -> {"regions": [{"label": str, "image": b64}, ...]}
//   POST /lookup  {"entity": str}                            -> {"text": str, "found": bool}
// Transient failures (connect errors, timeouts, 5xx) are retried with
// exponential backoff up to max_retries; 4xx responses are never retried.

namespace remod {

class HttpChat : public ChatBackend {
public:
    explicit HttpChat(BackendDescriptor desc);
    using ChatBackend::chat_complete;
    std::string chat_complete(const std::string& prompt,
                              const std::vector<std::vector<std::uint8_t>>& images) override;

private:
    BackendDescriptor desc_;
};

class HttpTextEmbedder : public TextEmbedder {
public:
    explicit HttpTextEmbedder(BackendDescriptor desc);
    std::size_t dimension() const override { return desc_.dimension; }
    std::vector<double> embed_text(const std::string& text) override;

private:
    BackendDescriptor desc_;
};

class HttpImageEmbedder : public ImageEmbedder {
public:
    explicit HttpImageEmbedder(BackendDescriptor desc);
    std::size_t dimension() const override { return desc_.dimension; }
    std::vector<double> embed_image(const ImageBuffer& image) override;

private:
    BackendDescriptor desc_;
};

class HttpSegmenter : public SegmentationBackend {
public:
    explicit HttpSegmenter(BackendDescriptor desc);
    std::vector<SubImage> segment(const ImageBuffer& image,
                                  const std::vector<std::string>& entities) override;

private:
    BackendDescriptor desc_;
};

class HttpKnowledgeClient : public KnowledgeClient {
public:
    explicit HttpKnowledgeClient(BackendDescriptor desc);
    Article lookup(const std::string& entity) override;

private:
    BackendDescriptor desc_;
};

}  // namespace remod
