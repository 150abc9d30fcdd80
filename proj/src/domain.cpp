#include "remod/domain.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "remod/error.hpp"

namespace remod {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::empty_text: return "EmptyText";
        case Errc::unknown_label: return "UnknownLabel";
        case Errc::duplicate_id: return "DuplicateId";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::zero_norm_vector: return "ZeroNormVector";
        case Errc::alpha_out_of_range: return "AlphaOutOfRange";
        case Errc::empty_payload: return "EmptyPayload";
        case Errc::backend_error: return "BackendError";
        case Errc::parse_error: return "ParseError";
        case Errc::network_error: return "NetworkError";
        case Errc::timeout: return "Timeout";
        case Errc::transport_error: return "TransportError";
        case Errc::remote_error: return "RemoteError";
        case Errc::mock_miss: return "MockMiss";
        case Errc::image_decode_error: return "ImageDecodeError";
        case Errc::io_error: return "IoError";
        case Errc::corrupt_pool_file: return "CorruptPoolFile";
        case Errc::dimension_inconsistency: return "DimensionInconsistency";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::precondition: return "PreconditionViolation";
        case Errc::config_error: return "ConfigError";
    }
    return "UnknownError";
}

std::string trim(const std::string& s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    auto begin = std::find_if_not(s.begin(), s.end(), is_space);
    auto end = std::find_if_not(s.rbegin(), s.rend(), is_space).base();
    return begin < end ? std::string(begin, end) : std::string();
}

namespace {
std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}
}  // namespace

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    for (const auto& l : labels_) {
        if (trim(l).empty())
            throw Error(Errc::config_error, "label set contains an empty label");
    }
    std::vector<std::string> lowered;
    lowered.reserve(labels_.size());
    for (const auto& l : labels_) lowered.push_back(lower(l));
    std::sort(lowered.begin(), lowered.end());
    if (std::adjacent_find(lowered.begin(), lowered.end()) != lowered.end())
        throw Error(Errc::config_error, "label set contains duplicates");
}

bool LabelSet::contains(const std::string& value) const {
    return std::find(labels_.begin(), labels_.end(), value) != labels_.end();
}

std::optional<std::string> LabelSet::canonical(const std::string& value) const {
    std::string needle = lower(trim(value));
    for (const auto& l : labels_) {
        if (lower(l) == needle) return l;
    }
    return std::nullopt;
}

const char* context_name(ContextKind c) {
    switch (c) {
        case ContextKind::text_only: return "text";
        case ContextKind::vision_only: return "vision";
        case ContextKind::multimodal: return "multimodal";
    }
    return "unknown";
}

const char* insight_kind_name(InsightKind k) {
    return k == InsightKind::modality ? "modality" : "semantic";
}

Sample validate_sample(const nlohmann::json& raw, const LabelSet& labels) {
    std::vector<std::pair<std::string, std::string>> bad;
    Sample s;

    auto get_string = [&](const char* key, bool required) -> std::optional<std::string> {
        if (!raw.contains(key)) {
            if (required) bad.emplace_back(key, "missing");
            return std::nullopt;
        }
        if (!raw[key].is_string()) {
            bad.emplace_back(key, "not a string");
            return std::nullopt;
        }
        return raw[key].get<std::string>();
    };

    if (auto v = get_string("id", true)) {
        s.id = *v;
        if (trim(s.id).empty()) bad.emplace_back("id", "empty");
    }
    if (auto v = get_string("target", true)) {
        s.target = *v;
        if (trim(s.target).empty()) bad.emplace_back("target", "empty");
    }
    if (auto v = get_string("text", true)) {
        s.text = *v;
        if (trim(s.text).empty()) bad.emplace_back("text", "empty after trimming");
    }
    if (auto v = get_string("image", false)) {
        if (!trim(*v).empty()) s.image_ref = *v;
    }
    if (auto v = get_string("label", false)) {
        if (!labels.contains(*v)) {
            bad.emplace_back("label", "'" + *v + "' not in the configured label set");
            throw ValidationError(Errc::unknown_label, "label '" + *v + "' unknown", bad);
        }
        s.gold = *v;
    }

    if (!bad.empty()) {
        Errc code = Errc::precondition;
        for (const auto& [field, why] : bad) {
            if (field == "text") code = Errc::empty_text;
        }
        std::string msg;
        for (const auto& [field, why] : bad) {
            if (!msg.empty()) msg += "; ";
            msg += field + ": " + why;
        }
        throw ValidationError(code, msg, bad);
    }
    return s;
}

nlohmann::json sample_to_json(const Sample& s) {
    nlohmann::json j;
    j["id"] = s.id;
    j["target"] = s.target;
    j["text"] = s.text;
    if (s.image_ref) j["image"] = *s.image_ref;
    if (s.gold) j["label"] = *s.gold;
    return j;
}

}  // namespace remod
