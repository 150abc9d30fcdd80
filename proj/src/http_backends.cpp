#include "remod/http_backends.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "remod/error.hpp"

namespace remod {

namespace {

struct Endpoint {
    std::string host;  // scheme://host:port
    std::string base_path;
};

Endpoint parse_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(Errc::config_error, "endpoint is not an http(s) URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string path = url.substr(path_start);
    if (path == "/") path.clear();
    return {url.substr(0, path_start), path};
}

// POSTs JSON with the descriptor's retry policy. Connection-level failures
// and 5xx responses are transient; 4xx means the request itself is wrong.
nlohmann::json post_json(const BackendDescriptor& desc, const std::string& path,
                         const nlohmann::json& body) {
    Endpoint ep = parse_endpoint(desc.endpoint);
    std::string payload = body.dump();
    std::string last_failure;

    for (int attempt = 0; attempt <= desc.max_retries; ++attempt) {
        if (attempt > 0) {
            auto delay = std::chrono::milliseconds(desc.backoff_ms << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(ep.host);
        client.set_connection_timeout(0, desc.timeout_ms * 1000);
        client.set_read_timeout(0, desc.timeout_ms * 1000);
        client.set_write_timeout(0, desc.timeout_ms * 1000);
        if (const char* token = std::getenv("REMOD_API_TOKEN"))
            client.set_bearer_token_auth(token);

        auto res = client.Post(ep.base_path + path, payload, "application/json");
        if (!res) {
            // connect/read/write failures are all transient
            last_failure = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::remote_error,
                            role_name(desc.role) + std::string(": unparseable response body: ") +
                                e.what());
            }
        }
        if (res->status >= 500) {
            last_failure = "HTTP " + std::to_string(res->status);
            continue;
        }
        // 4xx-class: not transient, surface immediately.
        std::string excerpt = res->body.substr(0, 200);
        throw Error(Errc::remote_error, role_name(desc.role) + std::string(": HTTP ") +
                                            std::to_string(res->status) + " " + excerpt);
    }
    throw Error(Errc::transport_error, role_name(desc.role) + std::string(": ") + last_failure +
                                           " after " + std::to_string(desc.max_retries + 1) +
                                           " attempts to " + desc.endpoint);
}

}  // namespace

HttpChat::HttpChat(BackendDescriptor desc) : desc_(std::move(desc)) {}

std::string HttpChat::chat_complete(const std::string& prompt,
                                    const std::vector<std::vector<std::uint8_t>>& images) {
    if (prompt.empty()) throw Error(Errc::precondition, "chat prompt must be non-empty");
    nlohmann::json body;
    body["prompt"] = prompt;
    auto imgs = nlohmann::json::array();
    for (const auto& bytes : images) imgs.push_back(base64_encode(bytes));
    body["images"] = imgs;
    body["temperature"] = desc_.temperature;
    auto reply = post_json(desc_, "/chat", body);
    if (!reply.contains("text") || !reply["text"].is_string())
        throw Error(Errc::remote_error, "chat: response missing 'text'");
    return reply["text"].get<std::string>();
}

HttpTextEmbedder::HttpTextEmbedder(BackendDescriptor desc) : desc_(std::move(desc)) {}

namespace {
std::vector<double> parse_vector(const nlohmann::json& reply, std::size_t expected,
                                 const char* role) {
    if (!reply.contains("vector") || !reply["vector"].is_array())
        throw Error(Errc::remote_error, std::string(role) + ": response missing 'vector'");
    std::vector<double> v;
    v.reserve(reply["vector"].size());
    for (const auto& x : reply["vector"]) {
        if (!x.is_number())
            throw Error(Errc::remote_error, std::string(role) + ": non-numeric component");
        v.push_back(x.get<double>());
    }
    if (v.size() != expected)
        throw Error(Errc::dimension_mismatch,
                    std::string(role) + ": remote returned " + std::to_string(v.size()) +
                        " components, declared " + std::to_string(expected));
    return v;
}
}  // namespace

std::vector<double> HttpTextEmbedder::embed_text(const std::string& text) {
    if (text.empty()) throw Error(Errc::precondition, "embed_text requires non-empty input");
    nlohmann::json body;
    body["input"] = text;
    return parse_vector(post_json(desc_, "/embed", body), desc_.dimension, "text_embedder");
}

HttpImageEmbedder::HttpImageEmbedder(BackendDescriptor desc) : desc_(std::move(desc)) {}

std::vector<double> HttpImageEmbedder::embed_image(const ImageBuffer& image) {
    if (image.empty()) throw Error(Errc::precondition, "embed_image requires a decoded image");
    nlohmann::json body;
    body["input"] = base64_encode(encode_image(image));
    return parse_vector(post_json(desc_, "/embed", body), desc_.dimension, "image_embedder");
}

HttpSegmenter::HttpSegmenter(BackendDescriptor desc) : desc_(std::move(desc)) {}

std::vector<SubImage> HttpSegmenter::segment(const ImageBuffer& image,
                                             const std::vector<std::string>& entities) {
    std::vector<SubImage> out;
    if (entities.empty()) return out;  // nothing to ground, skip the round trip
    nlohmann::json body;
    body["image"] = base64_encode(encode_image(image));
    body["labels"] = entities;
    auto reply = post_json(desc_, "/segment", body);
    if (!reply.contains("regions") || !reply["regions"].is_array())
        throw Error(Errc::remote_error, "segmenter: response missing 'regions'");
    for (const auto& region : reply["regions"]) {
        SubImage si;
        si.entity = region.value("label", std::string());
        si.image = decode_image(base64_decode(region.value("image", std::string())));
        out.push_back(std::move(si));
    }
    return out;
}

HttpKnowledgeClient::HttpKnowledgeClient(BackendDescriptor desc) : desc_(std::move(desc)) {}

KnowledgeClient::Article HttpKnowledgeClient::lookup(const std::string& entity) {
    if (entity.empty())
        throw Error(Errc::precondition, "knowledge lookup requires a non-empty entity");
    nlohmann::json body;
    body["entity"] = entity;
    try {
        auto reply = post_json(desc_, "/lookup", body);
        Article a;
        a.text = reply.value("text", std::string());
        a.found = reply.value("found", !a.text.empty());
        return a;
    } catch (const Error& e) {
        // An article that does not exist is data, not a failure.
        if (e.code() == Errc::remote_error &&
            std::string(e.what()).find("HTTP 404") != std::string::npos)
            return {"", false};
        throw;
    }
}

}  // namespace remod
