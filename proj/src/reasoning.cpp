#include "remod/reasoning.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include "remod/error.hpp"

namespace remod {

namespace {

using Clock = std::chrono::steady_clock;

struct StageTimer {
    std::map<std::string, double>& sink;
    std::string key;
    Clock::time_point start = Clock::now();

    ~StageTimer() {
        sink[key] += std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
};

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

// Finds "marker" at a line start (case-insensitive) and returns the rest of
// that line.
std::optional<std::string> line_after_marker(const std::string& reply, const char* marker) {
    std::string haystack = lower(reply);
    std::string needle = marker;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        if (pos == 0 || haystack[pos - 1] == '\n' || haystack[pos - 1] == ' ' ||
            haystack[pos - 1] == '|') {
            std::size_t value_start = pos + needle.size();
            std::size_t line_end = reply.find('\n', value_start);
            if (line_end == std::string::npos) line_end = reply.size();
            return reply.substr(value_start, line_end - value_start);
        }
        pos += needle.size();
    }
    return std::nullopt;
}

std::string payload_block(const std::vector<std::string>& payloads) {
    if (payloads.empty()) return "(none)";
    std::string out;
    for (const auto& p : payloads) {
        out += "- " + p + "\n";
    }
    out.pop_back();
    return out;
}

std::string entity_list(const SubImageSet& subimages) {
    if (subimages.empty()) return "(none)";
    std::string out;
    for (const auto& item : subimages.items) {
        if (!out.empty()) out += ", ";
        out += item.entity;
    }
    return out;
}

std::string labels_csv(const LabelSet& labels) {
    std::string out;
    for (const auto& l : labels.labels()) {
        if (!out.empty()) out += ", ";
        out += l;
    }
    return out;
}

std::vector<std::vector<std::uint8_t>> image_attachments(
    const SubImageSet& subimages, const std::optional<ImageBuffer>& whole_image) {
    std::vector<std::vector<std::uint8_t>> out;
    if (!subimages.empty()) {
        for (const auto& item : subimages.items) out.push_back(encode_image(item.image));
    } else if (whole_image) {
        out.push_back(encode_image(*whole_image));
    }
    return out;
}

std::string strict_label_suffix(const LabelSet& labels) {
    return "\n\nThe previous reply could not be parsed. Respond EXACTLY as:\nLABEL: <one of: " +
           labels_csv(labels) + ">\nRATIONALE: <one short paragraph>";
}

ContextualPrediction predict_one_context(ContextKind context, const std::string& prompt,
                                         const std::vector<std::vector<std::uint8_t>>& images,
                                         const char* counter_key, ReasoningEnv& env) {
    std::string reply;
    {
        ScopedOp op(*env.backends.counters, counter_key);
        reply = env.backends.chat->chat_complete(prompt, images);
    }

    ContextualPrediction pred;
    pred.context = context;
    if (auto parsed = try_parse_label_reply(reply, env.labels)) {
        pred.predicted = parsed->label;
        pred.rationale = parsed->rationale;
        return pred;
    }

    std::string retry;
    {
        ScopedOp op(*env.backends.counters, counter_key);
        retry = env.backends.chat->chat_complete(prompt + strict_label_suffix(env.labels), images);
    }
    if (auto parsed = try_parse_label_reply(retry, env.labels)) {
        pred.predicted = parsed->label;
        pred.rationale = parsed->rationale;
        return pred;
    }

    pred.predicted = env.fallback_label;
    pred.parse_fallback = true;
    std::string excerpt = trim(retry).substr(0, 120);
    pred.rationale = excerpt.empty() ? "backend reply carried no parseable label"
                                     : "unparseable reply: " + excerpt;
    return pred;
}

ContextualPrediction absent_modality_prediction(ContextKind context, ReasoningEnv& env) {
    ContextualPrediction pred;
    pred.context = context;
    pred.predicted = env.fallback_label;
    pred.absent_modality = true;
    pred.parse_fallback = true;
    pred.rationale = "modality absent: sample carries no image";
    return pred;
}

std::string assessment_block(const std::vector<ContextualPrediction>& preds,
                             const std::string& gold) {
    std::string out;
    for (const auto& p : preds) {
        out += std::string("- context=") + context_name(p.context) + " predicted=" + p.predicted +
               " correct=" + (p.predicted == gold ? "yes" : "no");
        if (p.absent_modality) out += " (modality absent)";
        out += "\n  rationale: " + p.rationale + "\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

Insight reflect(const char* template_name, const char* counter_key, InsightKind kind,
                std::map<std::string, std::string> vars, const Sample& sample,
                ReasoningEnv& env) {
    std::string prompt = env.prompts.render(template_name, vars);

    std::string reply;
    {
        ScopedOp op(*env.backends.counters, counter_key);
        reply = trim(env.backends.chat->chat_complete(prompt));
    }
    if (reply.empty()) {
        ScopedOp op(*env.backends.counters, counter_key);
        reply = trim(env.backends.chat->chat_complete(
            prompt + "\n\nThe previous reply was empty. Reply with the insight text itself."));
    }
    if (reply.empty()) throw Error(Errc::parse_error, "reflection reply empty after retry");

    Insight insight;
    insight.kind = kind;
    insight.text = reply;
    insight.source_sample = sample.id;
    return insight;
}

FuseFn make_fuser(ReasoningEnv& env) {
    return [&env](const std::string& prior, const std::string& insight) {
        std::string prompt =
            env.prompts.render("fuse_experience", {{"prior", prior}, {"insight", insight}});
        ScopedOp op(*env.backends.counters, "chat.fuse");
        return trim(env.backends.chat->chat_complete(prompt));
    };
}

QueryVectors encode_queries(const Sample& sample, const SubImageSet& subimages,
                            const std::optional<ImageBuffer>& whole_image, ReasoningEnv& env) {
    QueryVectors q;
    {
        ScopedOp op(*env.backends.counters, "embed.text_query");
        q.text = encode_text_query(sample.text, *env.backends.text_embedder);
    }
    auto embed_start = std::chrono::steady_clock::now();
    q.visual = encode_visual_query(subimages, whole_image, *env.backends.image_embedder,
                                   env.perception.min_short_side);
    double embed_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - embed_start)
                          .count();
    if (!subimages.empty()) {
        env.backends.counters->bump("embed.subimage", subimages.count());
        env.backends.counters->add_ms("embed.subimage", embed_ms);
    } else if (whole_image) {
        env.backends.counters->bump("embed.whole_image");
        env.backends.counters->add_ms("embed.whole_image", embed_ms);
    }
    return q;
}

std::vector<std::string> payloads_for_hits(const ExperiencePool& pool,
                                           const RetrievalResult& hits) {
    std::vector<std::string> out;
    for (const auto& hit : hits.hits) {
        const Experience* e = pool.find(hit.experience_id);
        if (e) out.push_back(e->payload);
    }
    return out;
}

}  // namespace

std::optional<ParsedReply> try_parse_label_reply(const std::string& reply,
                                                 const LabelSet& labels) {
    auto label_part = line_after_marker(reply, "label:");
    if (!label_part) return std::nullopt;
    std::string value = *label_part;
    if (auto bar = value.find('|'); bar != std::string::npos) value = value.substr(0, bar);
    auto canonical = labels.canonical(value);
    if (!canonical) {
        // Some models answer "LABEL: clearly favor"; accept a single trailing
        // token that matches.
        auto tokens = trim(value);
        auto space = tokens.find_last_of(" \t");
        if (space != std::string::npos) canonical = labels.canonical(tokens.substr(space + 1));
    }
    if (!canonical) return std::nullopt;

    ParsedReply parsed;
    parsed.label = *canonical;
    if (auto rationale = line_after_marker(reply, "rationale:")) {
        // take everything from the marker to the end of the reply
        std::string haystack = lower(reply);
        std::size_t pos = haystack.find("rationale:");
        parsed.rationale = trim(reply.substr(pos + std::string("rationale:").size()));
    }
    if (parsed.rationale.empty()) parsed.rationale = trim(reply);
    if (parsed.rationale.empty()) return std::nullopt;
    return parsed;
}

std::vector<ContextualPrediction> intuitive_predict(
    const Sample& sample, const KnowledgeBundle& bundle, const SubImageSet& subimages,
    const std::optional<ImageBuffer>& whole_image, const std::vector<std::string>& me_payloads,
    const std::vector<std::string>& se_payloads, ReasoningEnv& env) {
    if (env.labels.empty()) throw Error(Errc::precondition, "label set is empty");

    std::map<std::string, std::string> common = {
        {"target", sample.target},
        {"labels", labels_csv(env.labels)},
        {"me_experiences", payload_block(me_payloads)},
        {"se_experiences", payload_block(se_payloads)},
    };
    bool has_image = whole_image.has_value() || !subimages.empty();
    std::vector<ContextualPrediction> preds;

    {
        auto vars = common;
        vars["text"] = sample.text;
        preds.push_back(predict_one_context(ContextKind::text_only,
                                            env.prompts.render("intuitive_text", vars), {},
                                            "chat.intuitive_text", env));
    }

    if (!has_image) {
        preds.push_back(absent_modality_prediction(ContextKind::vision_only, env));
        preds.push_back(absent_modality_prediction(ContextKind::multimodal, env));
        return preds;
    }

    auto attachments = image_attachments(subimages, whole_image);
    std::string caption = bundle.caption.empty() ? "(none)" : bundle.caption;
    {
        auto vars = common;
        vars["caption"] = caption;
        vars["subimage_entities"] = entity_list(subimages);
        preds.push_back(predict_one_context(ContextKind::vision_only,
                                            env.prompts.render("intuitive_vision", vars),
                                            attachments, "chat.intuitive_vision", env));
    }
    {
        auto vars = common;
        vars["text"] = sample.text;
        vars["caption"] = caption;
        vars["subimage_entities"] = entity_list(subimages);
        preds.push_back(predict_one_context(ContextKind::multimodal,
                                            env.prompts.render("intuitive_multimodal", vars),
                                            attachments, "chat.intuitive_multimodal", env));
    }
    return preds;
}

Insight reflect_modality(const Sample& sample, const std::vector<ContextualPrediction>& preds,
                         const std::string& gold, ReasoningEnv& env) {
    if (gold.empty())
        throw Error(Errc::precondition, "modality reflection requires a gold label");
    return reflect("reflect_modality", "chat.reflect_modality", InsightKind::modality,
                   {{"target", sample.target},
                    {"gold", gold},
                    {"assessments", assessment_block(preds, gold)}},
                   sample, env);
}

Insight reflect_semantic(const Sample& sample, const std::vector<ContextualPrediction>& preds,
                         const std::string& gold, const std::string& text_knowledge,
                         const std::string& visual_knowledge, ReasoningEnv& env) {
    if (gold.empty())
        throw Error(Errc::precondition, "semantic reflection requires a gold label");
    return reflect("reflect_semantic", "chat.reflect_semantic", InsightKind::semantic,
                   {{"target", sample.target},
                    {"gold", gold},
                    {"assessments", assessment_block(preds, gold)},
                    {"text_knowledge", text_knowledge.empty() ? "(none)" : text_knowledge},
                    {"visual_knowledge", visual_knowledge.empty() ? "(none)" : visual_knowledge}},
                   sample, env);
}

TrainStepTrace train_step(const Sample& sample, const std::optional<ImageBuffer>& image,
                          ExperiencePool& mep, ExperiencePool& sep, ReasoningEnv& env) {
    if (!sample.gold) throw Error(Errc::precondition, "training requires a gold label");

    TrainStepTrace trace;
    trace.sample_id = sample.id;
    trace.me_retrieved.params = env.mep_retrieval;
    trace.se_retrieved.params = env.sep_retrieval;
    auto ms_before = env.backends.counters->ms_snapshot();

    PerceptionResult perceived;
    {
        StageTimer timer{trace.stage_ms, "perceive"};
        perceived = perceive(sample, image, env.backends, env.prompts, env.perception);
    }
    trace.bundle = perceived.bundle;
    trace.warnings = perceived.warnings;

    QueryVectors queries;
    {
        StageTimer timer{trace.stage_ms, "encode"};
        queries = encode_queries(sample, perceived.subimages, image, env);
    }

    std::vector<std::string> me_payloads, se_payloads;
    {
        StageTimer timer{trace.stage_ms, "retrieve"};
        if (!env.no_mep) {
            env.backends.counters->bump("retrieval.mep");
            trace.me_retrieved = rank_and_filter(mep, queries, env.mep_retrieval);
            me_payloads = payloads_for_hits(mep, trace.me_retrieved);
        }
        if (!env.no_sep) {
            env.backends.counters->bump("retrieval.sep");
            trace.se_retrieved = rank_and_filter(sep, queries, env.sep_retrieval);
            se_payloads = payloads_for_hits(sep, trace.se_retrieved);
        }
    }

    {
        StageTimer timer{trace.stage_ms, "intuitive"};
        trace.predictions = intuitive_predict(sample, perceived.bundle, perceived.subimages,
                                              image, me_payloads, se_payloads, env);
    }
    for (const auto& p : trace.predictions) trace.correct.push_back(p.predicted == *sample.gold);

    auto finalize = [&]() {
        // per-op wall time spent on this sample (training is single-threaded)
        auto ms_after = env.backends.counters->ms_snapshot();
        for (const auto& [key, total] : ms_after) {
            auto it = ms_before.find(key);
            double delta = total - (it == ms_before.end() ? 0.0 : it->second);
            if (delta > 0.0) trace.op_ms[key] = delta;
        }
    };

    if (env.no_cot) {  // reflection and evolution ablated
        finalize();
        return trace;
    }

    FuseFn fuser = make_fuser(env);
    // A disabled pool skips its whole chain: reflection would only feed the
    // evolution that is ablated with it.
    if (!env.no_mep) {
        {
            StageTimer timer{trace.stage_ms, "reflect"};
            trace.modality_insight = reflect_modality(sample, trace.predictions, *sample.gold, env);
        }
        StageTimer timer{trace.stage_ms, "evolve"};
        env.backends.counters->bump("evolve.mep");
        trace.mep_evolution =
            evolve(mep, queries, *trace.modality_insight, fuser, env.mep_retrieval);
    }
    if (!env.no_sep) {
        {
            StageTimer timer{trace.stage_ms, "reflect"};
            trace.semantic_insight =
                reflect_semantic(sample, trace.predictions, *sample.gold,
                                 perceived.bundle.text_knowledge,
                                 perceived.bundle.visual_knowledge, env);
        }
        StageTimer timer{trace.stage_ms, "evolve"};
        env.backends.counters->bump("evolve.sep");
        trace.sep_evolution =
            evolve(sep, queries, *trace.semantic_insight, fuser, env.sep_retrieval);
    }
    finalize();
    return trace;
}

InferenceResult infer(const Sample& sample, const std::optional<ImageBuffer>& image,
                      const ExperiencePool* mep, const ExperiencePool* sep, ReasoningEnv& env) {
    PerceptionResult perceived = perceive(sample, image, env.backends, env.prompts, env.perception);
    QueryVectors queries = encode_queries(sample, perceived.subimages, image, env);

    InferenceResult result;
    std::vector<std::string> me_payloads, se_payloads;
    if (!env.no_mep && mep) {
        env.backends.counters->bump("retrieval.mep");
        auto hits = rank_and_filter(*mep, queries, env.mep_retrieval);
        me_payloads = payloads_for_hits(*mep, hits);
        for (const auto& h : hits.hits) result.me_hit_ids.push_back(h.experience_id);
    }
    if (!env.no_sep && sep) {
        env.backends.counters->bump("retrieval.sep");
        auto hits = rank_and_filter(*sep, queries, env.sep_retrieval);
        se_payloads = payloads_for_hits(*sep, hits);
        for (const auto& h : hits.hits) result.se_hit_ids.push_back(h.experience_id);
    }

    std::map<std::string, std::string> vars = {
        {"target", sample.target},
        {"labels", labels_csv(env.labels)},
        {"me_experiences", payload_block(me_payloads)},
        {"se_experiences", payload_block(se_payloads)},
        {"caption", perceived.bundle.caption.empty() ? "(none)" : perceived.bundle.caption},
        {"subimage_entities", entity_list(perceived.subimages)},
        {"text", sample.text},
    };
    std::string prompt = env.prompts.render("final_inference", vars);
    auto attachments = image_attachments(perceived.subimages, image);

    ContextualPrediction pred = predict_one_context(ContextKind::multimodal, prompt, attachments,
                                                    "chat.final_inference", env);
    result.label = pred.predicted;
    result.rationale = pred.rationale;
    result.parse_fallback = pred.parse_fallback;
    return result;
}

}  // namespace remod
