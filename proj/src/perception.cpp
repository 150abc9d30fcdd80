#include "remod/perception.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "remod/error.hpp"

namespace remod {

namespace {

constexpr const char* kStrictListSuffix =
    "\n\nThe previous reply could not be parsed. Reply ONLY with the fenced JSON "
    "described above, with no commentary before or after it.";

// Pulls the first fenced block out of a reply; falls back to treating the
// whole reply as JSON.
std::optional<nlohmann::json> extract_json(const std::string& reply) {
    std::string content;
    auto fence = reply.find("```");
    if (fence != std::string::npos) {
        auto start = reply.find('\n', fence);
        if (start == std::string::npos) return std::nullopt;
        auto end = reply.find("```", start);
        if (end == std::string::npos) return std::nullopt;
        content = reply.substr(start + 1, end - start - 1);
    } else {
        content = reply;
    }
    auto j = nlohmann::json::parse(content, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
}

std::vector<std::string> dedup_entities(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& e : raw) {
        std::string t = trim(e);
        if (t.empty()) continue;
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
    return out;
}

std::optional<std::vector<std::string>> parse_entity_list(const std::string& reply) {
    auto j = extract_json(reply);
    if (!j || !j->is_array()) return std::nullopt;
    std::vector<std::string> entities;
    for (const auto& item : *j) {
        if (!item.is_string()) return std::nullopt;
        entities.push_back(item.get<std::string>());
    }
    return dedup_entities(entities);
}

}  // namespace

std::vector<std::string> extract_text_entities(const std::string& text, const std::string& target,
                                               ChatBackend& chat, const PromptLibrary& prompts,
                                               CallCounters& counters) {
    if (trim(text).empty())
        throw Error(Errc::precondition, "entity extraction requires non-empty text");
    std::string prompt =
        prompts.render("extract_text_entities", {{"target", target}, {"text", text}});

    {
        ScopedOp op(counters, "chat.entity_extraction");
        if (auto entities = parse_entity_list(chat.chat_complete(prompt))) return *entities;
    }
    {
        ScopedOp op(counters, "chat.entity_extraction");
        if (auto entities = parse_entity_list(chat.chat_complete(prompt + kStrictListSuffix)))
            return *entities;
    }
    throw Error(Errc::parse_error, "entity extraction reply unparseable after retry");
}

KnowledgeClient::Article fetch_knowledge(const std::string& entity, KnowledgeClient& kb,
                                         CallCounters& counters) {
    ScopedOp op(counters, "kb.lookup");
    auto article = kb.lookup(entity);
    if (!article.found) counters.bump("kb.not_found");
    return article;
}

std::string summarize_knowledge(const std::string& raw, const std::string& target,
                                KnowledgeSide side, ChatBackend& chat,
                                const PromptLibrary& prompts, CallCounters& counters) {
    if (trim(raw).empty()) return "";  // nothing to distill, no backend call
    const char* side_name = side == KnowledgeSide::text ? "TEXT SIDE" : "VISUAL SIDE";
    const char* counter_key =
        side == KnowledgeSide::text ? "chat.summarize_text" : "chat.summarize_visual";
    std::string prompt = prompts.render(
        "summarize_knowledge", {{"side", side_name}, {"target", target}, {"raw_knowledge", raw}});

    {
        ScopedOp op(counters, counter_key);
        std::string summary = trim(chat.chat_complete(prompt));
        if (!summary.empty()) return summary;
    }
    {
        ScopedOp op(counters, counter_key);
        std::string summary = trim(chat.chat_complete(
            prompt + "\n\nThe previous reply was empty. Reply with the summary text itself."));
        if (!summary.empty()) return summary;
    }
    throw Error(Errc::parse_error, "summarization reply empty after retry");
}

std::pair<std::string, std::vector<std::string>> caption_and_extract_visual_entities(
    const ImageBuffer& image, const std::string& target, ChatBackend& chat,
    const PromptLibrary& prompts, CallCounters& counters) {
    if (image.empty()) throw Error(Errc::precondition, "captioning requires a decoded image");
    std::string prompt = prompts.render("caption_image", {{"target", target}});
    std::vector<std::vector<std::uint8_t>> attachments{encode_image(image)};

    auto parse = [](const std::string& reply)
        -> std::optional<std::pair<std::string, std::vector<std::string>>> {
        auto j = extract_json(reply);
        if (!j || !j->is_object()) return std::nullopt;
        if (!j->contains("caption") || !(*j)["caption"].is_string()) return std::nullopt;
        std::string caption = trim((*j)["caption"].get<std::string>());
        if (caption.empty()) return std::nullopt;
        std::vector<std::string> entities;
        if (j->contains("entities")) {
            if (!(*j)["entities"].is_array()) return std::nullopt;
            for (const auto& item : (*j)["entities"]) {
                if (!item.is_string()) return std::nullopt;
                entities.push_back(item.get<std::string>());
            }
        }
        return std::make_pair(caption, dedup_entities(entities));
    };

    {
        ScopedOp op(counters, "chat.caption");
        if (auto parsed = parse(chat.chat_complete(prompt, attachments))) return *parsed;
    }
    {
        ScopedOp op(counters, "chat.caption");
        if (auto parsed = parse(chat.chat_complete(prompt + kStrictListSuffix, attachments)))
            return *parsed;
    }
    throw Error(Errc::parse_error, "caption reply unparseable after retry");
}

SubImageSet ground_entities(const ImageBuffer& image, const std::vector<std::string>& entities,
                            SegmentationBackend& segmenter, CallCounters& counters,
                            std::uint32_t min_short_side, std::vector<std::string>* warnings) {
    SubImageSet out;
    if (entities.empty()) return out;
    if (image.empty()) throw Error(Errc::precondition, "grounding requires a decoded image");

    std::vector<SubImage> regions;
    {
        ScopedOp op(counters, "segment.call");
        regions = segmenter.segment(image, entities);
    }

    for (auto& region : regions) {
        if (region.image.empty()) continue;
        // re-encode check plus the minimum-side rule before the crop is used
        encode_image(region.image);
        out.items.push_back({region.entity, ensure_min_short_side(region.image, min_short_side)});
    }
    if (warnings) {
        for (const auto& entity : entities) {
            bool grounded = std::any_of(out.items.begin(), out.items.end(),
                                        [&](const SubImage& s) { return s.entity == entity; });
            if (!grounded) warnings->push_back("segmenter could not ground entity '" + entity + "'");
        }
    }
    return out;
}

PerceptionResult perceive(const Sample& sample, const std::optional<ImageBuffer>& image,
                          BackendSet& backends, const PromptLibrary& prompts,
                          const PerceptionOptions& options) {
    PerceptionResult result;
    CallCounters& counters = *backends.counters;

    auto with_context = [&](const char* step, const Error& e) -> Error {
        return Error(e.code(),
                     std::string("perceive[") + step + "] sample " + sample.id + ": " + e.what());
    };

    auto gather_knowledge = [&](const std::vector<std::string>& entities) {
        std::string raw;
        for (const auto& entity : entities) {
            auto article = fetch_knowledge(entity, *backends.knowledge, counters);
            if (!article.found) {
                result.warnings.push_back("knowledge: entity '" + entity + "' not found");
                continue;
            }
            raw += "### " + entity + "\n" + article.text + "\n\n";
        }
        return raw;
    };

    if (options.with_knowledge) {
        try {
            result.bundle.text_entities = extract_text_entities(
                sample.text, sample.target, *backends.chat, prompts, counters);
        } catch (const Error& e) {
            throw with_context("text_entities", e);
        }
        try {
            std::string raw = gather_knowledge(result.bundle.text_entities);
            result.bundle.text_knowledge = summarize_knowledge(
                raw, sample.target, KnowledgeSide::text, *backends.chat, prompts, counters);
        } catch (const Error& e) {
            throw with_context("text_knowledge", e);
        }
    }

    if (image) {
        try {
            auto [caption, entities] = caption_and_extract_visual_entities(
                *image, sample.target, *backends.chat, prompts, counters);
            result.bundle.caption = caption;
            result.bundle.visual_entities = entities;
        } catch (const Error& e) {
            throw with_context("caption", e);
        }
        if (options.with_knowledge) {
            try {
                std::string raw = gather_knowledge(result.bundle.visual_entities);
                result.bundle.visual_knowledge = summarize_knowledge(
                    raw, sample.target, KnowledgeSide::visual, *backends.chat, prompts, counters);
            } catch (const Error& e) {
                throw with_context("visual_knowledge", e);
            }
        }
        try {
            result.subimages =
                ground_entities(*image, result.bundle.visual_entities, *backends.segmenter,
                                counters, options.min_short_side, &result.warnings);
        } catch (const Error& e) {
            throw with_context("grounding", e);
        }
    }

    return result;
}

}  // namespace remod
