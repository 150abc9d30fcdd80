// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line each. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "remod/dataset.hpp"
#include "remod/eval.hpp"
#include "remod/kernels.hpp"
#include "remod/mock_backends.hpp"
#include "remod/perception.hpp"
#include "remod/pool.hpp"
#include "remod/reasoning.hpp"
#include "remod/retrieval.hpp"
#include "remod/runner.hpp"
#include "remod/util.hpp"

#include "test_support.hpp"

using namespace remod;
using remod::test::TempDir;

namespace {

struct CheckFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define ACCEPT(cond)                                                              \
    do {                                                                          \
        if (!(cond)) throw CheckFailed("condition failed: " #cond);               \
    } while (0)

#define ACCEPT_MSG(cond, msg)                                                     \
    do {                                                                          \
        if (!(cond)) throw CheckFailed(std::string("condition failed: ") + msg);  \
    } while (0)

double now_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

std::map<BackendRole, BackendDescriptor> mock_descriptors(const std::string& chat_script,
                                                          const std::string& kb_dir,
                                                          std::size_t dim = 16) {
    std::map<BackendRole, BackendDescriptor> descs;
    descs[BackendRole::chat] = {BackendRole::chat, "mock:" + chat_script};
    descs[BackendRole::text_embedder] = {BackendRole::text_embedder, "mock:bag", 30000, 2, 100,
                                         dim};
    descs[BackendRole::image_embedder] = {BackendRole::image_embedder, "mock:bytes", 30000, 2, 100,
                                          dim};
    descs[BackendRole::segmenter] = {BackendRole::segmenter, "mock:quadrant"};
    descs[BackendRole::knowledge] = {
        BackendRole::knowledge,
        kb_dir.empty() ? std::string("mock:empty") : "fixture:" + kb_dir};
    return descs;
}

RunConfig fixture_run_config(const std::string& out_dir) {
    RunConfig config;
    config.labels = {"favor", "against", "neutral"};
    config.corpus = remod::test::fixture_path("corpus3.jsonl");
    config.out_dir = out_dir;
    config.backends = mock_descriptors(remod::test::fixture_path("chat_corpus3.jsonl"),
                                       remod::test::fixture_path("kb"));
    return config;
}

// ---------------------------------------------------------------------------
// criterion 1: retrieval vs brute-force oracle
// ---------------------------------------------------------------------------

double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    auto t = kernels::scalar::cosine_terms(a.data(), b.data(), a.size());
    if (t.dot == t.norm_a_sq && t.dot == t.norm_b_sq) return 1.0;
    double v = t.dot / (std::sqrt(t.norm_a_sq) * std::sqrt(t.norm_b_sq));
    return std::min(1.0, std::max(-1.0, v));
}

std::vector<std::uint64_t> oracle_rank(const ExperiencePool& pool, const QueryVectors& q,
                                       double alpha, double tau, std::size_t k) {
    struct Scored {
        std::uint64_t id;
        double mrs;
    };
    std::vector<Scored> scored;
    for (const auto& e : pool.entries()) {
        std::optional<double> su, sv;
        if (q.text) su = oracle_cosine(*q.text, e.key_text);
        if (q.visual && e.key_visual) sv = oracle_cosine(*q.visual, *e.key_visual);
        double mrs_value;
        if (su && sv) {
            if (alpha == 1.0)
                mrs_value = *su;
            else if (alpha == 0.0)
                mrs_value = *sv;
            else
                mrs_value = alpha * *su + (1.0 - alpha) * *sv;
        } else if (su) {
            mrs_value = *su;
        } else if (sv) {
            mrs_value = *sv;
        } else {
            continue;
        }
        scored.push_back({e.id, mrs_value});
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.mrs > b.mrs; });
    std::vector<std::uint64_t> ids;
    for (const auto& s : scored)
        if (s.mrs > tau && ids.size() < k) ids.push_back(s.id);
    return ids;
}

void criterion_retrieval_oracle() {
    // exercise the widest kernel backend this CPU has
    if (kernels::backend_supported(kernels::Backend::avx2))
        kernels::set_backend(kernels::Backend::avx2);
    else if (kernels::backend_supported(kernels::Backend::neon))
        kernels::set_backend(kernels::Backend::neon);
    std::fprintf(stderr, "         (kernel backend: %s)\n",
                 kernels::backend_name(kernels::active_backend()));

    const std::size_t dim = 16;
    std::mt19937_64 rng(20260808);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> alpha_dist(0.0, 1.0);
    std::uniform_real_distribution<double> tau_dist(-1.0, 1.0);

    double start = now_seconds();
    for (int rep = 0; rep < 500; ++rep) {
        std::size_t n = rng() % 10001;
        ExperiencePool pool(PoolKind::mep, dim, dim);
        std::vector<double> tie_key;
        for (std::size_t i = 0; i < n; ++i) {
            QueryVectors keys;
            // every 10th pool carries blocks of identical keys to force ties
            if (rep % 10 == 0 && i % 7 != 0 && !tie_key.empty()) {
                keys.text = tie_key;
            } else {
                keys.text = remod::test::random_vector(rng, dim);
                tie_key = *keys.text;
            }
            if (rng() % 5 != 0) keys.visual = remod::test::random_vector(rng, dim);
            pool.append(keys, "p", "s");
        }

        QueryVectors q;
        q.text = remod::test::random_vector(rng, dim);
        if (rng() % 4 != 0) q.visual = remod::test::random_vector(rng, dim);

        double alpha = alpha_dist(rng);
        double tau = tau_dist(rng);
        std::size_t k = 1 + rng() % 10;

        RetrievalResult got = rank_and_filter(pool, q, {alpha, tau, k});
        std::vector<std::uint64_t> want = oracle_rank(pool, q, alpha, tau, k);

        ACCEPT_MSG(got.hits.size() == want.size(),
                   "hit count mismatch on pool " + std::to_string(rep));
        for (std::size_t i = 0; i < want.size(); ++i)
            ACCEPT_MSG(got.hits[i].experience_id == want[i],
                       "id sequence diverged on pool " + std::to_string(rep) + " position " +
                           std::to_string(i));
        ACCEPT(got.hits.size() <= k);
        for (const auto& h : got.hits) ACCEPT(h.score.mrs > tau);
    }
    double elapsed = now_seconds() - start;
    ACCEPT_MSG(elapsed < 60.0, "runtime " + std::to_string(elapsed) + "s exceeds 60s");
}

// ---------------------------------------------------------------------------
// criterion 2: degenerate fusion weights
// ---------------------------------------------------------------------------

void criterion_mrs_weights() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double su = dist(rng), sv = dist(rng);
        ACCEPT(std::abs(mrs(su, sv, 1.0) - su) <= 1e-12);
        ACCEPT(std::abs(mrs(su, sv, 0.0) - sv) <= 1e-12);
    }
    ACCEPT(std::abs(mrs(0.9, 0.5, 0.7) - 0.78) <= 1e-12);
}

// ---------------------------------------------------------------------------
// criterion 3: cosine properties
// ---------------------------------------------------------------------------

void criterion_cosine_properties() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> scale_dist(0.001, 1000.0);
    for (int i = 0; i < 1000; ++i) {
        std::size_t d = 2 + rng() % 31;
        auto a = remod::test::random_vector(rng, d);
        auto b = remod::test::random_vector(rng, d);

        double ab = cosine(a, b);
        ACCEPT(std::abs(ab - cosine(b, a)) <= 1e-12);

        double c = scale_dist(rng);
        auto scaled = a;
        for (auto& x : scaled) x *= c;
        ACCEPT(std::abs(cosine(scaled, b) - ab) <= 1e-12);

        ACCEPT(cosine(a, a) == 1.0);
    }
}

// ---------------------------------------------------------------------------
// criterion 4: evolution state machine + replay
// ---------------------------------------------------------------------------

void criterion_evolution_state_machine() {
    TempDir dir("accept_evolve");
    std::mt19937_64 rng(4);
    const std::size_t dim = 8;

    FuseFn fuser = [](const std::string& prior, const std::string& insight) {
        return "fused(" + prior + "; " + insight + ")";
    };

    for (int seq = 0; seq < 200; ++seq) {
        struct Op {
            QueryVectors keys;
            std::string text;
            std::string source;
        };
        std::vector<Op> log;
        ExperiencePool pool(PoolKind::sep, dim, dim);
        std::size_t ops = 5 + rng() % 20;

        for (std::size_t op = 0; op < ops; ++op) {
            Op record;
            record.keys.text = remod::test::random_vector(rng, dim);
            if (rng() % 3 != 0) record.keys.visual = remod::test::random_vector(rng, dim);
            // occasionally replay an existing key to force the update branch
            if (!pool.empty() && rng() % 3 == 0) {
                const auto& e = pool.entries()[rng() % pool.size()];
                record.keys.text = e.key_text;
                record.keys.visual = e.key_visual;
            }
            record.text = "insight-" + std::to_string(seq) + "-" + std::to_string(op);
            record.source = "s" + std::to_string(op);
            log.push_back(record);

            std::size_t before_size = pool.size();
            std::vector<std::uint32_t> before_revs;
            std::vector<std::vector<double>> before_keys;
            for (const auto& e : pool.entries()) {
                before_revs.push_back(e.revision);
                before_keys.push_back(e.key_text);
            }

            Insight insight{InsightKind::semantic, record.text, record.source};
            EvolutionRecord rec = evolve(pool, record.keys, insight, fuser, {0.7, 0.8, 3});

            std::size_t bumped = 0;
            for (std::size_t i = 0; i < before_revs.size(); ++i) {
                ACCEPT_MSG(pool.entries()[i].key_text == before_keys[i], "key vector changed");
                std::uint32_t now = pool.entries()[i].revision;
                ACCEPT_MSG(now == before_revs[i] || now == before_revs[i] + 1,
                           "revision jumped by more than one");
                if (now != before_revs[i]) ++bumped;
            }
            bool appended = rec.outcome == EvolutionRecord::Outcome::appended;
            bool grew = pool.size() == before_size + 1;
            ACCEPT_MSG((appended && grew && bumped == 0) ||
                           (!appended && !grew && bumped >= 1),
                       "append/update branches not exclusive");
        }

        std::string first = dir.file("a.jsonl");
        persist(pool, first);
        ExperiencePool replayed(PoolKind::sep, dim, dim);
        for (const auto& record : log) {
            Insight insight{InsightKind::semantic, record.text, record.source};
            evolve(replayed, record.keys, insight, fuser, {0.7, 0.8, 3});
        }
        std::string second = dir.file("b.jsonl");
        persist(replayed, second);
        ACCEPT_MSG(remod::test::read_text(first) == remod::test::read_text(second),
                   "replay did not reproduce the pool byte-for-byte (seq " +
                       std::to_string(seq) + ")");
    }
}

// ---------------------------------------------------------------------------
// criterion 5: persistence round trip
// ---------------------------------------------------------------------------

void criterion_persistence_round_trip() {
    TempDir dir("accept_persist");
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t d_text = 1 + rng() % 24;
        std::size_t d_visual = 1 + rng() % 24;
        ExperiencePool pool(rep % 2 ? PoolKind::mep : PoolKind::sep, d_text, d_visual);
        std::size_t n = rng() % 60;
        for (std::size_t i = 0; i < n; ++i) {
            QueryVectors keys;
            keys.text.emplace();
            for (std::size_t j = 0; j < d_text; ++j) {
                // wide magnitude spread stresses the decimal round trip
                int exponent = int(rng() % 61) - 30;
                double mantissa = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
                double value = mantissa * std::pow(10.0, exponent);
                keys.text->push_back(value == 0.0 ? 1.0 : value);
            }
            if (rng() % 4 != 0) {
                keys.visual.emplace();
                for (std::size_t j = 0; j < d_visual; ++j)
                    keys.visual->push_back(unit_double(rng()) + 1.5);
            }
            pool.append(keys, "payload \"quoted\" line\nsecond line " + std::to_string(rng()),
                        "sample-" + std::to_string(i));
        }
        std::string path = dir.file("pool.jsonl");
        persist(pool, path);
        ExperiencePool back = load_pool(path);
        ACCEPT_MSG(pools_equal(pool, back),
                   "round trip lost information on pool " + std::to_string(rep));
    }
}

// ---------------------------------------------------------------------------
// criterion 6: macro-F1 oracle
// ---------------------------------------------------------------------------

double counting_macro_f1(const std::vector<std::string>& preds,
                         const std::vector<std::string>& golds,
                         const std::vector<std::string>& labels) {
    double sum = 0.0;
    for (const auto& label : labels) {
        std::uint64_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (preds[i] == label && golds[i] == label) ++tp;
            if (preds[i] == label && golds[i] != label) ++fp;
            if (preds[i] != label && golds[i] == label) ++fn;
        }
        double p = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
        double r = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
        sum += p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
    return sum / double(labels.size());
}

void criterion_macro_f1_oracle() {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 1000; ++rep) {
        std::size_t n_labels = 2 + rng() % 5;
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < n_labels; ++i) labels.push_back("L" + std::to_string(i));
        std::size_t n = 1 + rng() % 60;
        std::vector<std::string> preds, golds;
        for (std::size_t i = 0; i < n; ++i) {
            preds.push_back(labels[rng() % n_labels]);
            golds.push_back(labels[rng() % n_labels]);
        }
        double got = macro_f1(preds, golds, LabelSet(labels));
        double want = counting_macro_f1(preds, golds, labels);
        ACCEPT_MSG(got == want, "macro-F1 disagreed with the counting oracle");
    }
    double worked = macro_f1({"A", "B", "B", "B"}, {"A", "A", "B", "B"}, LabelSet({"A", "B"}));
    ACCEPT(std::abs(worked - 11.0 / 15.0) <= 1e-12);
}

// ---------------------------------------------------------------------------
// criterion 7: end-to-end determinism
// ---------------------------------------------------------------------------

void criterion_end_to_end_determinism() {
    double start = now_seconds();
    TempDir dir_a("accept_det_a"), dir_b("accept_det_b");

    auto run_once = [](const std::string& out) {
        RunConfig config = fixture_run_config(out);
        run_train(config);
        return run_eval(config);
    };
    EvalOutcome a = run_once(dir_a.str());
    EvalOutcome b = run_once(dir_b.str());

    auto same = [](const std::string& x, const std::string& y) {
        return remod::test::read_text(x) == remod::test::read_text(y);
    };
    ACCEPT_MSG(same(dir_a.str() + "/mep.jsonl", dir_b.str() + "/mep.jsonl"),
               "MEP files differ between runs");
    ACCEPT_MSG(same(dir_a.str() + "/sep.jsonl", dir_b.str() + "/sep.jsonl"),
               "SEP files differ between runs");
    ACCEPT_MSG(same(a.predictions_path, b.predictions_path), "predictions differ between runs");
    ACCEPT_MSG(same(a.report_path, b.report_path), "reports differ between runs");

    double elapsed = now_seconds() - start;
    ACCEPT_MSG(elapsed < 10.0, "runtime " + std::to_string(elapsed) + "s exceeds 10s");
}

// ---------------------------------------------------------------------------
// criterion 8: ablation contracts
// ---------------------------------------------------------------------------

void criterion_ablation_contracts() {
    TempDir dir("accept_ablation");

    // --no-mep: zero MEP retrievals and evolutions across train and eval
    {
        RunConfig config = fixture_run_config(dir.str() + "/nomep");
        config.no_mep = true;
        TrainOutcome train = run_train(config);
        ACCEPT(train.counters.count("retrieval.mep") == 0);
        ACCEPT(train.counters.count("evolve.mep") == 0);
        EvalOutcome eval = run_eval(config);
        ACCEPT(eval.counters.count("retrieval.mep") == 0);
    }

    // --no-cot: pools stay empty after training
    {
        RunConfig config = fixture_run_config(dir.str() + "/nocot");
        config.no_cot = true;
        TrainOutcome train = run_train(config);
        ACCEPT(load_pool(train.mep_path).empty());
        ACCEPT(load_pool(train.sep_path).empty());
    }

    // tau = 1.0 sweep row equals the no-retrieval ablation
    {
        RunConfig config = fixture_run_config(dir.str() + "/tau1");
        run_train(config);

        SweepOutcome sweep = sweep_tau(config, {1.0});
        RunConfig ablated = config;
        ablated.no_mep = true;
        ablated.no_sep = true;
        ablated.out_dir = dir.str() + "/tau1/ablated";
        ablated.mep_pool = config.mep_path();
        ablated.sep_pool = config.sep_path();
        EvalOutcome no_retrieval = run_eval(ablated);
        ACCEPT_MSG(sweep.rows.at(0).macro_f1 == no_retrieval.report.macro_f1,
                   "tau=1.0 row differs from the no-retrieval ablation");
    }
}

// ---------------------------------------------------------------------------
// criterion 9: experience-utility pathway
// ---------------------------------------------------------------------------

void criterion_experience_utility() {
    TempDir dir("accept_utility");
    const char* labels[] = {"favor", "against", "neutral"};

    std::string corpus = dir.file("corpus20.jsonl");
    {
        std::string body;
        for (int i = 0; i < 20; ++i) {
            const char* gold = labels[i % 3];
            nlohmann::json j;
            j["id"] = "e" + std::to_string(i);
            j["target"] = "UtilityCheck";
            j["text"] = "post " + std::to_string(i) + " about the utility check gold-hint=" +
                        gold + " token-" + std::to_string(i);
            j["label"] = gold;
            body += j.dump() + "\n";
        }
        remod::test::write_text(corpus, body);
    }

    std::string script = dir.file("chat.jsonl");
    remod::test::write_text(
        script,
        R"({"match":{"regex":"TASK: ENTITY EXTRACTION"},"reply":"```json\n[]\n```"})"
        "\n"
        R"({"match":{"regex":"CONTEXT: TEXT-ONLY"},"reply":"LABEL: neutral\nRATIONALE: preliminary pass."})"
        "\n"
        R"({"match":{"regex":"TASK: MODALITY REFLECTION"},"reply":"planted-memory-7429: prioritize explicit hints in the text."})"
        "\n"
        R"({"match":{"regex":"TASK: SEMANTIC REFLECTION"},"reply":"planted-memory-7429: verify hints against the stated target."})"
        "\n"
        R"({"match":{"regex":"TASK: EXPERIENCE FUSION"},"reply":"planted-memory-7429: fused guidance."})"
        "\n"
        R"J({"match":{"regex":"TASK: FINAL STANCE INFERENCE[\\s\\S]*planted-memory-7429[\\s\\S]*gold-hint=([a-z]+)"},"reply":"LABEL: $1\nRATIONALE: recovered the hint with the planted experience."})J"
        "\n"
        R"({"match":{"regex":"TASK: FINAL STANCE INFERENCE"},"reply":"LABEL: favor\nRATIONALE: no experience available, guessing."})"
        "\n");

    RunConfig config;
    config.labels = {"favor", "against", "neutral"};
    config.corpus = corpus;
    config.out_dir = dir.file("out");
    config.backends = mock_descriptors(script, "");

    run_train(config);

    auto accuracy = [](const std::string& predictions_path) {
        std::ifstream in(predictions_path);
        std::size_t total = 0, correct = 0;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = nlohmann::json::parse(line);
            ++total;
            if (j.at("predicted") == j.at("gold")) ++correct;
        }
        return total == 0 ? 0.0 : double(correct) / double(total);
    };

    EvalOutcome with_pools = run_eval(config);
    double acc_with = accuracy(with_pools.predictions_path);

    RunConfig ablated = config;
    ablated.no_mep = true;
    ablated.no_sep = true;
    ablated.out_dir = dir.file("out_ablated");
    ablated.mep_pool = config.mep_path();
    ablated.sep_pool = config.sep_path();
    EvalOutcome without_pools = run_eval(ablated);
    double acc_without = accuracy(without_pools.predictions_path);

    ACCEPT_MSG(acc_with == 1.0, "pools enabled should recover every hint, got " +
                                    std::to_string(acc_with));
    ACCEPT_MSG(acc_without < acc_with,
               "ablated accuracy " + std::to_string(acc_without) + " is not strictly lower");
}

// ---------------------------------------------------------------------------
// criterion 10: perception call counts + minimum image side
// ---------------------------------------------------------------------------

void criterion_perception_bounds() {
    LabelSet labels({"favor", "against", "neutral"});
    CorpusLoad corpus = load_dataset(remod::test::fixture_path("corpus3.jsonl"), labels, false);
    PromptLibrary prompts = PromptLibrary::builtin_defaults();

    for (const Sample& sample : corpus.samples) {
        BackendSet backends = make_backend_set(
            mock_descriptors(remod::test::fixture_path("chat_corpus3.jsonl"),
                             remod::test::fixture_path("kb")),
            1);
        std::optional<ImageBuffer> image;
        if (sample.image_ref)
            image = decode_image(read_file_bytes(remod::test::fixture_path(*sample.image_ref)));

        PerceptionResult result = perceive(sample, image, backends, prompts, {});
        const auto& c = *backends.counters;
        ACCEPT_MSG(c.count("chat.entity_extraction") == 1, "entity extraction not exactly 1");
        ACCEPT_MSG(c.count("chat.caption") == 1, "caption not exactly 1");
        std::uint64_t summaries =
            c.count("chat.summarize_text") + c.count("chat.summarize_visual");
        ACCEPT_MSG(summaries <= 2, "more than 2 summarization calls");
        ACCEPT_MSG(c.count("segment.call") == 1, "segmentation not exactly 1");

        // the embedding boundary only ever sees images at or above 28px
        BytesImageEmbedder probe(16, 1);
        auto visual = encode_visual_query(result.subimages, image, probe);
        ACCEPT(visual.has_value());
        ACCEPT(!probe.seen_short_sides().empty());
        for (auto side : probe.seen_short_sides())
            ACCEPT_MSG(side >= 28, "embedded image short side " + std::to_string(side) + " < 28");
    }

    // text-only sample: no caption, no segmentation, at most one summary
    {
        BackendSet backends = make_backend_set(
            mock_descriptors(remod::test::fixture_path("chat_corpus3.jsonl"),
                             remod::test::fixture_path("kb")),
            1);
        Sample sample;
        sample.id = "textonly";
        sample.target = "GreenPolicy";
        sample.text = "a post with no image stance-hint=neutral";
        perceive(sample, std::nullopt, backends, prompts, {});
        const auto& c = *backends.counters;
        ACCEPT(c.count("chat.entity_extraction") == 1);
        ACCEPT(c.count("chat.caption") == 0);
        ACCEPT(c.count("chat.summarize_text") + c.count("chat.summarize_visual") <= 1);
        ACCEPT(c.count("segment.call") == 0);
    }
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* title;
    std::function<void()> run;
};

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "retrieval equals the brute-force oracle on 500 randomized pools",
         criterion_retrieval_oracle},
        {2, "fusion weights: alpha=1 and alpha=0 are exact; 0.7*0.9+0.3*0.5 = 0.78",
         criterion_mrs_weights},
        {3, "cosine symmetry, positive-scale invariance, exact self-similarity",
         criterion_cosine_properties},
        {4, "evolution state machine: exclusive branch, frozen keys, byte-exact replay",
         criterion_evolution_state_machine},
        {5, "pool persistence round-trips bit-exactly on 100 randomized pools",
         criterion_persistence_round_trip},
        {6, "macro-F1 agrees exactly with an independent counting oracle",
         criterion_macro_f1_oracle},
        {7, "fixture corpus trains and evaluates byte-identically across runs",
         criterion_end_to_end_determinism},
        {8, "ablation contracts: --no-mep counters, --no-cot empty pools, tau=1.0 row",
         criterion_ablation_contracts},
        {9, "retrieved experiences flip final predictions from guesses to hits",
         criterion_experience_utility},
        {10, "perception call counts bounded; embedded images at least 28px",
         criterion_perception_bounds},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        double start = now_seconds();
        try {
            criterion.run();
            std::printf("[PASS] criterion %2d: %s (%.2fs)\n", criterion.id, criterion.title,
                        now_seconds() - start);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("[FAIL] criterion %2d: %s\n        %s\n", criterion.id, criterion.title,
                        e.what());
        }
        std::fflush(stdout);
    }
    if (failures == 0)
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
