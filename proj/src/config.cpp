#include "remod/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "remod/error.hpp"
#include "remod/util.hpp"

namespace remod {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw Error(Errc::config_error, key + ": '" + value + "' is not a number");
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw Error(Errc::config_error, key + ": '" + value + "' is not a non-negative integer");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw Error(Errc::config_error, key + ": '" + value + "' is not a boolean");
}

BackendRole role_from_section(const std::string& section) {
    if (section == "chat") return BackendRole::chat;
    if (section == "text_embedder") return BackendRole::text_embedder;
    if (section == "image_embedder") return BackendRole::image_embedder;
    if (section == "segmenter") return BackendRole::segmenter;
    if (section == "knowledge") return BackendRole::knowledge;
    throw Error(Errc::config_error, "unknown config section [" + section + "]");
}

}  // namespace

void apply_config_kv(RunConfig& config, const std::string& section, const std::string& key,
                     const std::string& value) {
    if (!section.empty()) {
        BackendRole role = role_from_section(section);
        BackendDescriptor& d = config.backends[role];
        d.role = role;
        if (key == "endpoint")
            d.endpoint = value;
        else if (key == "timeout_ms")
            d.timeout_ms = int(parse_uint(section + "." + key, value));
        else if (key == "max_retries")
            d.max_retries = int(parse_uint(section + "." + key, value));
        else if (key == "backoff_ms")
            d.backoff_ms = int(parse_uint(section + "." + key, value));
        else if (key == "dimension")
            d.dimension = std::size_t(parse_uint(section + "." + key, value));
        else if (key == "temperature")
            d.temperature = parse_double(section + "." + key, value);
        else
            throw Error(Errc::config_error, "unknown key '" + key + "' in [" + section + "]");
        return;
    }

    if (key == "alpha")
        config.alpha = parse_double(key, value);
    else if (key == "tau")
        config.tau = parse_double(key, value);
    else if (key == "k")
        config.k = std::size_t(parse_uint(key, value));
    else if (key == "mep_alpha")
        config.mep_alpha = parse_double(key, value);
    else if (key == "mep_tau")
        config.mep_tau = parse_double(key, value);
    else if (key == "mep_k")
        config.mep_k = std::size_t(parse_uint(key, value));
    else if (key == "sep_alpha")
        config.sep_alpha = parse_double(key, value);
    else if (key == "sep_tau")
        config.sep_tau = parse_double(key, value);
    else if (key == "sep_k")
        config.sep_k = std::size_t(parse_uint(key, value));
    else if (key == "labels") {
        config.labels.clear();
        for (const auto& l : split(value, ',')) {
            std::string t = trim(l);
            if (!t.empty()) config.labels.push_back(t);
        }
    } else if (key == "fallback_label")
        config.fallback_label = value;
    else if (key == "no_mep")
        config.no_mep = parse_bool(key, value);
    else if (key == "no_sep")
        config.no_sep = parse_bool(key, value);
    else if (key == "no_cot")
        config.no_cot = parse_bool(key, value);
    else if (key == "corpus")
        config.corpus = value;
    else if (key == "mep_pool")
        config.mep_pool = value;
    else if (key == "sep_pool")
        config.sep_pool = value;
    else if (key == "templates")
        config.templates_dir = value;
    else if (key == "out")
        config.out_dir = value;
    else if (key == "epochs")
        config.epochs = std::size_t(parse_uint(key, value));
    else if (key == "seed")
        config.seed = parse_uint(key, value);
    else if (key == "workers")
        config.workers = std::size_t(parse_uint(key, value));
    else if (key == "resume")
        config.resume = parse_bool(key, value);
    else if (key == "skip_errors")
        config.skip_errors = parse_bool(key, value);
    else if (key == "cache")
        config.cache = parse_bool(key, value);
    else if (key == "cache_file")
        config.cache_file = value;
    else if (key == "infer_knowledge")
        config.infer_knowledge = parse_bool(key, value);
    else if (key == "tag")
        config.tag = value;
    else
        throw Error(Errc::config_error, "unknown config key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open config file " + path);

    RunConfig config;
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::config_error,
                        path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        try {
            apply_config_kv(config, section, key, value);
        } catch (const Error& e) {
            throw Error(e.code(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return config;
}

LabelSet RunConfig::label_set() const { return LabelSet(labels); }

std::string RunConfig::resolved_fallback() const {
    if (!fallback_label.empty()) return fallback_label;
    for (const auto& l : labels) {
        std::string lowered = l;
        std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                       [](unsigned char c) { return char(std::tolower(c)); });
        if (lowered == "neutral" || lowered == "comment" || lowered == "none") return l;
    }
    return labels.empty() ? std::string() : labels.front();
}

RetrievalParams RunConfig::retrieval_params() const { return {alpha, tau, k}; }

RetrievalParams RunConfig::mep_retrieval_params() const {
    return {mep_alpha.value_or(alpha), mep_tau.value_or(tau), mep_k.value_or(k)};
}

RetrievalParams RunConfig::sep_retrieval_params() const {
    return {sep_alpha.value_or(alpha), sep_tau.value_or(tau), sep_k.value_or(k)};
}

std::string RunConfig::mep_path() const {
    return mep_pool.empty() ? out_dir + "/mep.jsonl" : mep_pool;
}

std::string RunConfig::sep_path() const {
    return sep_pool.empty() ? out_dir + "/sep.jsonl" : sep_pool;
}

std::string RunConfig::cache_path() const {
    if (!cache) return {};
    return cache_file.empty() ? out_dir + "/response_cache.jsonl" : cache_file;
}

void RunConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw Error(Errc::config_error, "alpha must lie in [0, 1]");
    if (!(tau >= -1.0 && tau <= 1.0)) throw Error(Errc::config_error, "tau must lie in [-1, 1]");
    if (k < 1) throw Error(Errc::config_error, "k must be >= 1");
    mep_retrieval_params().validate();
    sep_retrieval_params().validate();
    if (labels.empty()) throw Error(Errc::config_error, "label set is empty");
    LabelSet set(labels);
    std::string fb = resolved_fallback();
    if (!set.contains(fb))
        throw Error(Errc::config_error, "fallback label '" + fb + "' not in the label set");
    if (epochs < 1) throw Error(Errc::config_error, "epochs must be >= 1");
    if (workers < 1) throw Error(Errc::config_error, "workers must be >= 1");
    for (const auto& [role, desc] : backends) desc.validate();
}

}  // namespace remod
