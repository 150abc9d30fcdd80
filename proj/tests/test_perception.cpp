#include <doctest.h>

#include "remod/error.hpp"
#include "remod/mock_backends.hpp"
#include "remod/perception.hpp"
#include "test_support.hpp"

using namespace remod;
using remod::test::TempDir;

namespace {

struct Fixture {
    TempDir dir{"perception"};
    PromptLibrary prompts = PromptLibrary::builtin_defaults();
    BackendSet backends;

    explicit Fixture(const std::string& script_body) {
        std::string script = dir.file("chat.jsonl");
        remod::test::write_text(script, script_body);
        std::map<BackendRole, BackendDescriptor> descs;
        descs[BackendRole::chat] = {BackendRole::chat, "mock:" + script};
        descs[BackendRole::text_embedder] = {BackendRole::text_embedder, "mock:bag", 1000, 0, 100,
                                             8};
        descs[BackendRole::image_embedder] = {BackendRole::image_embedder, "mock:bytes", 1000, 0,
                                              100, 8};
        descs[BackendRole::segmenter] = {BackendRole::segmenter, "mock:quadrant"};
        descs[BackendRole::knowledge] = {BackendRole::knowledge,
                                         "fixture:" + remod::test::fixture_path("kb")};
        backends = make_backend_set(descs, 7);
    }
};

ImageBuffer fixture_image(const char* name) {
    return decode_image(read_file_bytes(remod::test::fixture_path(std::string("images/") + name)));
}

}  // namespace

TEST_CASE("extract_text_entities parses and dedups the fenced list") {
    Fixture fx(R"({"match":{"regex":"ENTITY EXTRACTION"},"reply":"```json\n[\"Putin\",\"Putin\",\"Russia\",\"  \"]\n```"})"
               "\n");
    auto entities = extract_text_entities("some text", "T", *fx.backends.chat, fx.prompts,
                                          *fx.backends.counters);
    CHECK(entities == std::vector<std::string>{"Putin", "Russia"});
    CHECK(fx.backends.counters->count("chat.entity_extraction") == 1);
}

TEST_CASE("extract_text_entities retries once, then raises ParseError") {
    Fixture fx(R"({"match":{"regex":"ENTITY EXTRACTION"},"reply":"no json here"})"
               "\n");
    try {
        extract_text_entities("text", "T", *fx.backends.chat, fx.prompts, *fx.backends.counters);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::parse_error);
    }
    CHECK(fx.backends.counters->count("chat.entity_extraction") == 2);
}

TEST_CASE("a parse failure recovers when the strict retry succeeds") {
    // The retry prompt carries the stricter instruction marker; the first rule
    // only matches it, so attempt #1 misses JSON and attempt #2 parses.
    Fixture fx(R"({"match":{"regex":"could not be parsed"},"reply":"[\"A\"]"})"
               "\n"
               R"({"match":{"regex":"ENTITY EXTRACTION"},"reply":"prose"})"
               "\n");
    auto entities = extract_text_entities("text", "T", *fx.backends.chat, fx.prompts,
                                          *fx.backends.counters);
    CHECK(entities == std::vector<std::string>{"A"});
    CHECK(fx.backends.counters->count("chat.entity_extraction") == 2);
}

TEST_CASE("fetch_knowledge maps misses to empty text and counts them") {
    Fixture fx("");
    auto hit = fetch_knowledge("Solar", *fx.backends.knowledge, *fx.backends.counters);
    CHECK(hit.found);
    auto miss = fetch_knowledge("Nonexistent", *fx.backends.knowledge, *fx.backends.counters);
    CHECK_FALSE(miss.found);
    CHECK(miss.text.empty());
    CHECK(fx.backends.counters->count("kb.lookup") == 2);
    CHECK(fx.backends.counters->count("kb.not_found") == 1);
}

TEST_CASE("summarize_knowledge short-circuits on empty raw input") {
    Fixture fx("");  // any chat call would be a MockMiss
    CHECK(summarize_knowledge("", "T", KnowledgeSide::text, *fx.backends.chat, fx.prompts,
                              *fx.backends.counters) == "");
    CHECK(summarize_knowledge("   \n", "T", KnowledgeSide::text, *fx.backends.chat, fx.prompts,
                              *fx.backends.counters) == "");
    CHECK(fx.backends.counters->count("chat.summarize_text") == 0);
}

TEST_CASE("summarize_knowledge issues one call per side") {
    Fixture fx(R"J({"match":{"regex":"KNOWLEDGE SUMMARIZATION \\(TEXT SIDE\\)"},"reply":"text summary"})J"
               "\n"
               R"J({"match":{"regex":"KNOWLEDGE SUMMARIZATION \\(VISUAL SIDE\\)"},"reply":"visual summary"})J"
               "\n");
    CHECK(summarize_knowledge("raw a", "T", KnowledgeSide::text, *fx.backends.chat, fx.prompts,
                              *fx.backends.counters) == "text summary");
    CHECK(summarize_knowledge("raw b", "T", KnowledgeSide::visual, *fx.backends.chat, fx.prompts,
                              *fx.backends.counters) == "visual summary");
    CHECK(fx.backends.counters->count("chat.summarize_text") == 1);
    CHECK(fx.backends.counters->count("chat.summarize_visual") == 1);
}

TEST_CASE("caption parses the fenced object and validates the caption") {
    Fixture fx(R"({"match":{"regex":"IMAGE CAPTIONING"},"reply":"```json\n{\"caption\":\"a dog\",\"entities\":[\"dog\",\"dog\",\"ball\"]}\n```"})"
               "\n");
    auto [caption, entities] = caption_and_extract_visual_entities(
        fixture_image("s1.pgm"), "T", *fx.backends.chat, fx.prompts, *fx.backends.counters);
    CHECK(caption == "a dog");
    CHECK(entities == std::vector<std::string>{"dog", "ball"});
    CHECK(fx.backends.counters->count("chat.caption") == 1);
}

TEST_CASE("ground_entities segments, upscales, and skips empty entity lists") {
    Fixture fx("");
    ImageBuffer img = fixture_image("s1.pgm");  // 8x6, quadrants are 4x3

    std::vector<std::string> warnings;
    SubImageSet grounded = ground_entities(img, {"panel", "sun"}, *fx.backends.segmenter,
                                           *fx.backends.counters, 28, &warnings);
    REQUIRE(grounded.count() == 2);
    for (const auto& item : grounded.items) {
        CHECK(item.image.short_side() >= 28);  // 4x3 crop upscaled
        CHECK_FALSE(encode_image(item.image).empty());
    }
    CHECK(warnings.empty());
    CHECK(fx.backends.counters->count("segment.call") == 1);

    SubImageSet none = ground_entities(img, {}, *fx.backends.segmenter, *fx.backends.counters, 28,
                                       &warnings);
    CHECK(none.empty());
    CHECK(fx.backends.counters->count("segment.call") == 1);  // unchanged
}

TEST_CASE("perceive composes the full stage deterministically") {
    std::string script = remod::test::read_text(remod::test::fixture_path("chat_corpus3.jsonl"));
    Fixture fx(script);
    Sample sample;
    sample.id = "s1";
    sample.target = "GreenPolicy";
    sample.text = "Rooftop panels keep winning, stance-hint=favor and our bills dropped";

    ImageBuffer img = fixture_image("s1.pgm");
    PerceptionResult a = perceive(sample, img, fx.backends, fx.prompts, {});
    CHECK(a.bundle.text_entities == std::vector<std::string>{"Solar", "Wind"});
    CHECK(a.bundle.caption == "a rooftop solar panel under the sun");
    CHECK(a.bundle.visual_entities == std::vector<std::string>{"panel", "sun"});
    CHECK_FALSE(a.bundle.text_knowledge.empty());
    CHECK_FALSE(a.bundle.visual_knowledge.empty());
    CHECK(a.subimages.count() == 2);

    // exact call counts for one full perception pass
    CHECK(fx.backends.counters->count("chat.entity_extraction") == 1);
    CHECK(fx.backends.counters->count("chat.caption") == 1);
    CHECK(fx.backends.counters->count("chat.summarize_text") == 1);
    CHECK(fx.backends.counters->count("chat.summarize_visual") == 1);
    CHECK(fx.backends.counters->count("segment.call") == 1);

    // determinism: a rebuilt fixture produces an identical bundle
    Fixture fx2(script);
    PerceptionResult b = perceive(sample, img, fx2.backends, fx2.prompts, {});
    CHECK(a.bundle.text_knowledge == b.bundle.text_knowledge);
    CHECK(a.bundle.caption == b.bundle.caption);
    CHECK(a.subimages.count() == b.subimages.count());
    for (std::size_t i = 0; i < a.subimages.count(); ++i)
        CHECK(a.subimages.items[i].image.pixels == b.subimages.items[i].image.pixels);
}

TEST_CASE("perceive on a text-only sample leaves the visual side empty") {
    std::string script = remod::test::read_text(remod::test::fixture_path("chat_corpus3.jsonl"));
    Fixture fx(script);
    Sample sample;
    sample.id = "t1";
    sample.target = "GreenPolicy";
    sample.text = "text only stance-hint=favor";

    PerceptionResult r = perceive(sample, std::nullopt, fx.backends, fx.prompts, {});
    CHECK(r.bundle.caption.empty());
    CHECK(r.bundle.visual_entities.empty());
    CHECK(r.bundle.visual_knowledge.empty());
    CHECK(r.subimages.empty());
    CHECK(fx.backends.counters->count("chat.caption") == 0);
    CHECK(fx.backends.counters->count("segment.call") == 0);
}

TEST_CASE("perceive survives a fully offline knowledge base") {
    Fixture fx(R"({"match":{"regex":"ENTITY EXTRACTION"},"reply":"```json\n[\"Unknown1\",\"Unknown2\"]\n```"})"
               "\n");
    // point the KB at an empty directory
    std::map<BackendRole, BackendDescriptor> descs;
    descs[BackendRole::chat] = {BackendRole::chat, "mock:" + fx.dir.file("chat.jsonl")};
    descs[BackendRole::text_embedder] = {BackendRole::text_embedder, "mock:bag", 1000, 0, 100, 8};
    descs[BackendRole::image_embedder] = {BackendRole::image_embedder, "mock:bytes", 1000, 0, 100,
                                          8};
    descs[BackendRole::segmenter] = {BackendRole::segmenter, "mock:quadrant"};
    descs[BackendRole::knowledge] = {BackendRole::knowledge, "mock:empty"};
    BackendSet offline = make_backend_set(descs, 7);

    Sample sample;
    sample.id = "x";
    sample.target = "T";
    sample.text = "whatever text";
    PerceptionResult r = perceive(sample, std::nullopt, offline, fx.prompts, {});
    CHECK(r.bundle.text_knowledge.empty());  // all lookups missed, summary skipped
    CHECK(r.warnings.size() == 2);
    CHECK(offline.counters->count("chat.summarize_text") == 0);
}
