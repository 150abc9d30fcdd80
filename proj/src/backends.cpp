#include "remod/backends.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "remod/error.hpp"
#include "remod/http_backends.hpp"
#include "remod/mock_backends.hpp"
#include "remod/util.hpp"

namespace remod {

const char* role_name(BackendRole role) {
    switch (role) {
        case BackendRole::chat: return "chat";
        case BackendRole::text_embedder: return "text_embedder";
        case BackendRole::image_embedder: return "image_embedder";
        case BackendRole::segmenter: return "segmenter";
        case BackendRole::knowledge: return "knowledge";
    }
    return "unknown";
}

void BackendDescriptor::validate() const {
    if (endpoint.empty())
        throw Error(Errc::config_error, std::string(role_name(role)) + ": endpoint not set");
    if (timeout_ms <= 0)
        throw Error(Errc::config_error, std::string(role_name(role)) + ": timeout must be > 0");
    if (max_retries < 0)
        throw Error(Errc::config_error, std::string(role_name(role)) + ": max_retries < 0");
    bool is_embedder = role == BackendRole::text_embedder || role == BackendRole::image_embedder;
    if (is_embedder && dimension == 0)
        throw Error(Errc::config_error,
                    std::string(role_name(role)) + ": embedders need dimension > 0");
}

void CallCounters::bump(const std::string& key, std::uint64_t n) {
    std::lock_guard lock(mu_);
    counts_[key] += n;
}

std::uint64_t CallCounters::count(const std::string& key) const {
    std::lock_guard lock(mu_);
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
}

std::map<std::string, std::uint64_t> CallCounters::snapshot() const {
    std::lock_guard lock(mu_);
    return counts_;
}

void CallCounters::add_ms(const std::string& key, double ms) {
    std::lock_guard lock(mu_);
    ms_[key] += ms;
}

std::map<std::string, double> CallCounters::ms_snapshot() const {
    std::lock_guard lock(mu_);
    return ms_;
}

void CallCounters::reset() {
    std::lock_guard lock(mu_);
    counts_.clear();
    ms_.clear();
}

ScopedOp::ScopedOp(CallCounters& counters, std::string key)
    : counters_(counters), key_(std::move(key)), start_(std::chrono::steady_clock::now()) {
    counters_.bump(key_);
}

ScopedOp::~ScopedOp() {
    auto elapsed = std::chrono::steady_clock::now() - start_;
    counters_.add_ms(key_, std::chrono::duration<double, std::milli>(elapsed).count());
}

CachingChat::CachingChat(std::unique_ptr<ChatBackend> inner, std::string path)
    : inner_(std::move(inner)), path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // fresh cache
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("key") || !j.contains("reply")) continue;
        entries_[j["key"].get<std::string>()] = j["reply"].get<std::string>();
    }
}

std::string CachingChat::chat_complete(const std::string& prompt,
                                       const std::vector<std::vector<std::uint8_t>>& images) {
    std::uint64_t img_hash = 0xcbf29ce484222325ull;
    for (const auto& bytes : images) img_hash ^= fnv1a64(bytes.data(), bytes.size());
    std::string key = hex64(fnv1a64(prompt)) + "-" + hex64(img_hash);
    {
        std::lock_guard lock(mu_);
        auto it = entries_.find(key);
        if (it != entries_.end()) return it->second;
    }
    std::string reply = inner_->chat_complete(prompt, images);
    std::lock_guard lock(mu_);
    auto [it, inserted] = entries_.emplace(key, reply);
    if (inserted) {
        std::ofstream out(path_, std::ios::app);
        if (out) {
            nlohmann::json j;
            j["key"] = key;
            j["reply"] = reply;
            out << j.dump() << '\n';
        }
    }
    return it->second;
}

CountingChat::CountingChat(std::unique_ptr<ChatBackend> inner,
                           std::shared_ptr<CallCounters> counters, std::string prefix)
    : inner_(std::move(inner)), counters_(std::move(counters)), prefix_(std::move(prefix)) {}

std::string CountingChat::chat_complete(const std::string& prompt,
                                        const std::vector<std::vector<std::uint8_t>>& images) {
    counters_->bump(prefix_ + ".requests");
    return inner_->chat_complete(prompt, images);
}

namespace {

struct ParsedEndpoint {
    std::string scheme;  // "mock", "fixture", "http", "https"
    std::string body;    // everything after "scheme:" with ?query stripped
    std::map<std::string, std::string> query;
};

ParsedEndpoint parse_scheme(const std::string& endpoint) {
    ParsedEndpoint out;
    auto colon = endpoint.find(':');
    if (colon == std::string::npos)
        throw Error(Errc::config_error, "endpoint needs a scheme: " + endpoint);
    out.scheme = endpoint.substr(0, colon);
    std::string rest = endpoint.substr(colon + 1);
    if (out.scheme == "http" || out.scheme == "https") {
        out.body = endpoint;  // keep the full URL
        return out;
    }
    auto qmark = rest.find('?');
    if (qmark != std::string::npos) {
        for (const auto& kv : split(rest.substr(qmark + 1), '&')) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                out.query[kv] = "";
            else
                out.query[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        rest = rest.substr(0, qmark);
    }
    out.body = rest;
    return out;
}

std::uint64_t query_seed(const ParsedEndpoint& ep, std::uint64_t fallback) {
    auto it = ep.query.find("seed");
    if (it == ep.query.end()) return fallback;
    return std::stoull(it->second);
}

const BackendDescriptor& descriptor_for(const std::map<BackendRole, BackendDescriptor>& descs,
                                        BackendRole role) {
    auto it = descs.find(role);
    if (it == descs.end())
        throw Error(Errc::config_error,
                    std::string("no backend configured for role ") + role_name(role));
    it->second.validate();
    return it->second;
}

}  // namespace

BackendSet make_backend_set(const std::map<BackendRole, BackendDescriptor>& descriptors,
                            std::uint64_t seed, const std::string& cache_path) {
    BackendSet set;

    {
        const auto& d = descriptor_for(descriptors, BackendRole::chat);
        auto ep = parse_scheme(d.endpoint);
        std::unique_ptr<ChatBackend> chat;
        if (ep.scheme == "mock") {
            auto mode_it = ep.query.find("mode");
            auto mode = (mode_it != ep.query.end() && mode_it->second == "lenient")
                            ? ScriptedChat::Mode::lenient
                            : ScriptedChat::Mode::strict;
            chat = std::make_unique<ScriptedChat>(ep.body, mode);
        } else if (ep.scheme == "http" || ep.scheme == "https") {
            chat = std::make_unique<HttpChat>(d);
        } else {
            throw Error(Errc::config_error, "chat: unknown endpoint scheme " + ep.scheme);
        }
        chat = std::make_unique<CountingChat>(std::move(chat), set.counters, "backend.chat");
        if (!cache_path.empty()) chat = std::make_unique<CachingChat>(std::move(chat), cache_path);
        set.chat = std::move(chat);
    }

    {
        const auto& d = descriptor_for(descriptors, BackendRole::text_embedder);
        auto ep = parse_scheme(d.endpoint);
        if (ep.scheme == "mock") {
            std::uint64_t s = query_seed(ep, seed) ^ 0x7465787400000000ull;
            if (ep.body == "bag" || ep.body.empty())
                set.text_embedder = std::make_unique<BagOfTokensEmbedder>(d.dimension, s);
            else if (ep.body == "hash")
                set.text_embedder = std::make_unique<HashTextEmbedder>(d.dimension, s);
            else
                throw Error(Errc::config_error, "text_embedder: unknown mock " + ep.body);
        } else if (ep.scheme == "http" || ep.scheme == "https") {
            set.text_embedder = std::make_unique<HttpTextEmbedder>(d);
        } else {
            throw Error(Errc::config_error, "text_embedder: unknown endpoint scheme " + ep.scheme);
        }
    }

    {
        const auto& d = descriptor_for(descriptors, BackendRole::image_embedder);
        auto ep = parse_scheme(d.endpoint);
        if (ep.scheme == "mock") {
            std::uint64_t s = query_seed(ep, seed) ^ 0x696d616765000000ull;
            if (ep.body == "bytes" || ep.body.empty())
                set.image_embedder = std::make_unique<BytesImageEmbedder>(d.dimension, s);
            else
                throw Error(Errc::config_error, "image_embedder: unknown mock " + ep.body);
        } else if (ep.scheme == "http" || ep.scheme == "https") {
            set.image_embedder = std::make_unique<HttpImageEmbedder>(d);
        } else {
            throw Error(Errc::config_error,
                        "image_embedder: unknown endpoint scheme " + ep.scheme);
        }
    }

    {
        const auto& d = descriptor_for(descriptors, BackendRole::segmenter);
        auto ep = parse_scheme(d.endpoint);
        if (ep.scheme == "mock") {
            if (ep.body == "quadrant" || ep.body.empty())
                set.segmenter = std::make_unique<QuadrantSegmenter>();
            else
                throw Error(Errc::config_error, "segmenter: unknown mock " + ep.body);
        } else if (ep.scheme == "http" || ep.scheme == "https") {
            set.segmenter = std::make_unique<HttpSegmenter>(d);
        } else {
            throw Error(Errc::config_error, "segmenter: unknown endpoint scheme " + ep.scheme);
        }
    }

    {
        const auto& d = descriptor_for(descriptors, BackendRole::knowledge);
        auto ep = parse_scheme(d.endpoint);
        if (ep.scheme == "fixture") {
            set.knowledge = std::make_unique<FixtureKnowledgeClient>(ep.body);
        } else if (ep.scheme == "mock") {
            set.knowledge = std::make_unique<EmptyKnowledgeClient>();
        } else if (ep.scheme == "http" || ep.scheme == "https") {
            set.knowledge = std::make_unique<HttpKnowledgeClient>(d);
        } else {
            throw Error(Errc::config_error, "knowledge: unknown endpoint scheme " + ep.scheme);
        }
    }

    return set;
}

}  // namespace remod
