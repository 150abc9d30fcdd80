#include "remod/mock_backends.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "remod/error.hpp"
#include "remod/util.hpp"

namespace remod {

ScriptedChat::ScriptedChat(std::string script_path, Mode mode) : mode_(mode) {
    if (script_path.empty()) {
        if (mode_ == Mode::strict)
            throw Error(Errc::config_error, "strict mock chat requires a script path");
        return;
    }
    std::ifstream in(script_path);
    if (!in) throw Error(Errc::io_error, "cannot open mock script " + script_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::parse_error, script_path + ":" + std::to_string(lineno) + ": " +
                                               e.what());
        }
        Rule rule;
        if (!j.contains("match") || !j.contains("reply"))
            throw Error(Errc::parse_error, script_path + ":" + std::to_string(lineno) +
                                               ": rule needs 'match' and 'reply'");
        const auto& m = j["match"];
        if (m.contains("hash")) {
            rule.hash = m["hash"].get<std::string>();
        } else if (m.contains("regex")) {
            try {
                rule.regex.emplace(m["regex"].get<std::string>(), std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw Error(Errc::parse_error, script_path + ":" + std::to_string(lineno) +
                                                   ": bad regex: " + e.what());
            }
        } else {
            throw Error(Errc::parse_error, script_path + ":" + std::to_string(lineno) +
                                               ": match needs 'hash' or 'regex'");
        }
        rule.reply = j["reply"].get<std::string>();
        rules_.push_back(std::move(rule));
    }
}

std::string ScriptedChat::chat_complete(const std::string& prompt,
                                        const std::vector<std::vector<std::uint8_t>>&) {
    std::string prompt_hash = hex64(fnv1a64(prompt));
    for (const auto& rule : rules_) {
        if (rule.hash) {
            if (*rule.hash == prompt_hash) return rule.reply;
        } else if (rule.regex) {
            std::smatch m;
            if (std::regex_search(prompt, m, *rule.regex)) {
                // Let replies substitute capture groups.
                return m.format(rule.reply);
            }
        }
    }
    if (mode_ == Mode::strict)
        throw Error(Errc::mock_miss, "no rule matched prompt hash " + prompt_hash);
    return "canned-reply-" + prompt_hash;
}

namespace {

std::vector<double> seeded_vector(std::uint64_t seed, std::size_t dim) {
    std::vector<double> v(dim);
    std::uint64_t state = seed;
    for (std::size_t i = 0; i < dim; ++i) v[i] = unit_double(splitmix64(state));
    return v;
}

std::string lower_copy(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

}  // namespace

BagOfTokensEmbedder::BagOfTokensEmbedder(std::size_t dimension, std::uint64_t seed)
    : dim_(dimension), seed_(seed) {
    if (dim_ == 0) throw Error(Errc::config_error, "embedder dimension must be > 0");
}

std::vector<double> BagOfTokensEmbedder::embed_text(const std::string& text) {
    if (trim(text).empty())
        throw Error(Errc::precondition, "embed_text requires non-empty input");
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : lower_copy(text)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) tokens.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    std::sort(tokens.begin(), tokens.end());

    std::vector<double> acc(dim_, 0.0);
    for (const auto& tok : tokens) {
        std::vector<double> tv = seeded_vector(fnv1a64(tok) ^ seed_, dim_);
        for (std::size_t i = 0; i < dim_; ++i) acc[i] += tv[i];
    }
    bool all_zero = std::all_of(acc.begin(), acc.end(), [](double x) { return x == 0.0; });
    if (all_zero) acc[0] = 1.0;
    return acc;
}

HashTextEmbedder::HashTextEmbedder(std::size_t dimension, std::uint64_t seed)
    : dim_(dimension), seed_(seed) {
    if (dim_ == 0) throw Error(Errc::config_error, "embedder dimension must be > 0");
}

std::vector<double> HashTextEmbedder::embed_text(const std::string& text) {
    if (trim(text).empty())
        throw Error(Errc::precondition, "embed_text requires non-empty input");
    auto v = seeded_vector(fnv1a64(text) ^ seed_, dim_);
    bool all_zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    if (all_zero) v[0] = 1.0;
    return v;
}

BytesImageEmbedder::BytesImageEmbedder(std::size_t dimension, std::uint64_t seed)
    : dim_(dimension), seed_(seed) {
    if (dim_ == 0) throw Error(Errc::config_error, "embedder dimension must be > 0");
}

std::vector<double> BytesImageEmbedder::embed_image(const ImageBuffer& image) {
    if (image.empty()) throw Error(Errc::precondition, "embed_image requires a decoded image");
    {
        std::lock_guard lock(mu_);
        short_sides_.push_back(image.short_side());
    }
    auto bytes = encode_image(image);
    auto v = seeded_vector(fnv1a64(bytes.data(), bytes.size()) ^ seed_, dim_);
    bool all_zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    if (all_zero) v[0] = 1.0;
    return v;
}

std::vector<std::uint32_t> BytesImageEmbedder::seen_short_sides() const {
    std::lock_guard lock(mu_);
    return short_sides_;
}

std::vector<SubImage> QuadrantSegmenter::segment(const ImageBuffer& image,
                                                 const std::vector<std::string>& entities) {
    std::vector<SubImage> out;
    if (entities.empty()) return out;
    std::uint32_t hw = std::max<std::uint32_t>(1, image.width / 2);
    std::uint32_t hh = std::max<std::uint32_t>(1, image.height / 2);
    for (std::size_t i = 0; i < entities.size(); ++i) {
        std::uint32_t qx = (i % 2 == 0) ? 0 : hw;
        std::uint32_t qy = (i % 4 < 2) ? 0 : hh;
        out.push_back({entities[i], crop(image, qx, qy, hw, hh)});
    }
    return out;
}

FixtureKnowledgeClient::FixtureKnowledgeClient(std::string dir) : dir_(std::move(dir)) {}

KnowledgeClient::Article FixtureKnowledgeClient::lookup(const std::string& entity) {
    if (trim(entity).empty())
        throw Error(Errc::precondition, "knowledge lookup requires a non-empty entity");
    std::string name;
    for (char c : entity)
        name.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    std::filesystem::path path = std::filesystem::path(dir_) / (name + ".txt");
    std::ifstream in(path);
    if (!in) return {"", false};
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return {text, true};
}

KnowledgeClient::Article EmptyKnowledgeClient::lookup(const std::string& entity) {
    if (trim(entity).empty())
        throw Error(Errc::precondition, "knowledge lookup requires a non-empty entity");
    return {"", false};
}

}  // namespace remod
