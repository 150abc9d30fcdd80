#include "remod/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "remod/dataset.hpp"
#include "remod/error.hpp"
#include "remod/reasoning.hpp"
#include "remod/util.hpp"

namespace remod {

namespace fs = std::filesystem;

namespace {

std::optional<ImageBuffer> load_sample_image(const std::string& corpus_path, const Sample& sample) {
    if (!sample.image_ref) return std::nullopt;
    fs::path p(*sample.image_ref);
    if (p.is_relative()) p = fs::path(corpus_path).parent_path() / p;
    return decode_image(read_file_bytes(p.string()));
}

void atomic_persist(const ExperiencePool& pool, const std::string& path) {
    std::string tmp = path + ".tmp";
    persist(pool, tmp);
    fs::rename(tmp, path);
}

nlohmann::json retrieval_to_json(const RetrievalResult& r) {
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : r.hits) {
        nlohmann::json j;
        j["id"] = h.experience_id;
        j["mrs"] = h.score.mrs;
        if (h.score.s_text) j["s_text"] = *h.score.s_text;
        if (h.score.s_visual) j["s_visual"] = *h.score.s_visual;
        hits.push_back(j);
    }
    return hits;
}

nlohmann::json evolution_to_json(const EvolutionRecord& r) {
    nlohmann::json j;
    j["outcome"] = r.outcome == EvolutionRecord::Outcome::appended ? "appended" : "updated";
    j["ids"] = r.ids;
    return j;
}

nlohmann::json trace_to_json(const TrainStepTrace& t) {
    nlohmann::json j;
    j["sample"] = t.sample_id;
    j["me_hits"] = retrieval_to_json(t.me_retrieved);
    j["se_hits"] = retrieval_to_json(t.se_retrieved);
    nlohmann::json preds = nlohmann::json::array();
    for (std::size_t i = 0; i < t.predictions.size(); ++i) {
        const auto& p = t.predictions[i];
        nlohmann::json pj;
        pj["context"] = context_name(p.context);
        pj["predicted"] = p.predicted;
        pj["rationale"] = p.rationale;
        pj["parse_fallback"] = p.parse_fallback;
        pj["absent_modality"] = p.absent_modality;
        if (i < t.correct.size()) pj["correct"] = static_cast<bool>(t.correct[i]);
        preds.push_back(pj);
    }
    j["predictions"] = preds;
    if (t.modality_insight) j["modality_insight"] = t.modality_insight->text;
    if (t.semantic_insight) j["semantic_insight"] = t.semantic_insight->text;
    if (t.mep_evolution) j["mep_evolution"] = evolution_to_json(*t.mep_evolution);
    if (t.sep_evolution) j["sep_evolution"] = evolution_to_json(*t.sep_evolution);
    j["caption"] = t.bundle.caption;
    j["text_entities"] = t.bundle.text_entities;
    j["visual_entities"] = t.bundle.visual_entities;
    if (!t.warnings.empty()) j["warnings"] = t.warnings;
    j["stage_ms"] = t.stage_ms;
    j["op_ms"] = t.op_ms;
    return j;
}

struct Progress {
    std::size_t epoch = 0;
    std::size_t index = 0;  // next sample to process within the epoch
};

void write_progress(const std::string& path, const Progress& p) {
    nlohmann::json j;
    j["epoch"] = p.epoch;
    j["next_index"] = p.index;
    std::ofstream out(path, std::ios::trunc);
    out << j.dump() << '\n';
}

std::optional<Progress> read_progress(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    Progress p;
    p.epoch = j.value("epoch", std::size_t(0));
    p.index = j.value("next_index", std::size_t(0));
    return p;
}

ExperiencePool open_pool(PoolKind kind, const std::string& path, bool reuse, std::size_t d_text,
                         std::size_t d_visual) {
    if (reuse && fs::exists(path)) {
        ExperiencePool pool = load_pool(path);
        if (pool.kind() != kind)
            throw Error(Errc::config_error, path + " holds the wrong pool kind");
        if (pool.d_text() != d_text || pool.d_visual() != d_visual)
            throw Error(Errc::dimension_inconsistency,
                        path + " key dimensions do not match the configured embedders");
        return pool;
    }
    return ExperiencePool(kind, d_text, d_visual);
}

ReasoningEnv make_env(BackendSet& backends, const PromptLibrary& prompts,
                      const RunConfig& config, bool inference) {
    ReasoningEnv env{backends,
                     prompts,
                     config.label_set(),
                     config.resolved_fallback(),
                     config.mep_retrieval_params(),
                     config.sep_retrieval_params(),
                     config.no_mep,
                     config.no_sep,
                     config.no_cot,
                     {}};
    env.perception.with_knowledge = inference ? config.infer_knowledge : true;
    return env;
}

}  // namespace

TrainOutcome run_train(const RunConfig& config) {
    config.validate();
    if (config.corpus.empty()) throw Error(Errc::config_error, "train: corpus not set");
    fs::create_directories(config.out_dir);

    CorpusLoad corpus = load_dataset(config.corpus, config.label_set(), config.skip_errors);

    PromptLibrary prompts = PromptLibrary::load_dir(config.templates_dir);
    BackendSet backends = make_backend_set(config.backends, config.seed, config.cache_path());
    std::size_t d_text = backends.text_embedder->dimension();
    std::size_t d_visual = backends.image_embedder->dimension();

    TrainOutcome outcome;
    outcome.mep_path = config.mep_path();
    outcome.sep_path = config.sep_path();
    outcome.trace_path = config.out_dir + "/traces.jsonl";
    outcome.warnings = corpus.warnings;
    std::string progress_path = config.out_dir + "/train_progress.json";

    ExperiencePool mep = open_pool(PoolKind::mep, outcome.mep_path, config.resume, d_text, d_visual);
    ExperiencePool sep = open_pool(PoolKind::sep, outcome.sep_path, config.resume, d_text, d_visual);

    Progress start;
    if (config.resume) {
        if (auto p = read_progress(progress_path)) start = *p;
    }
    std::ofstream traces(outcome.trace_path,
                         config.resume ? std::ios::app : std::ios::trunc);
    if (!traces) throw Error(Errc::io_error, "cannot write " + outcome.trace_path);

    ReasoningEnv env = make_env(backends, prompts, config, /*inference=*/false);

    for (std::size_t epoch = start.epoch; epoch < config.epochs; ++epoch) {
        std::size_t begin = (epoch == start.epoch) ? start.index : 0;
        for (std::size_t i = begin; i < corpus.samples.size(); ++i) {
            const Sample& sample = corpus.samples[i];
            try {
                if (!sample.gold)
                    throw Error(Errc::precondition, "sample " + sample.id + " has no gold label");
                auto image = load_sample_image(config.corpus, sample);
                TrainStepTrace trace = train_step(sample, image, mep, sep, env);
                traces << trace_to_json(trace).dump() << '\n';
                traces.flush();
                outcome.samples_processed += 1;
            } catch (const Error& e) {
                if (!config.skip_errors) throw;
                outcome.samples_skipped += 1;
                outcome.warnings.push_back("train: skipped sample " + sample.id + ": " + e.what());
            }
            atomic_persist(mep, outcome.mep_path);
            atomic_persist(sep, outcome.sep_path);
            write_progress(progress_path, {epoch, i + 1});
        }
    }

    atomic_persist(mep, outcome.mep_path);
    atomic_persist(sep, outcome.sep_path);
    write_progress(progress_path, {config.epochs, 0});
    outcome.counters = backends.counters->snapshot();
    return outcome;
}

EvalOutcome run_eval(const RunConfig& config) {
    config.validate();
    if (config.corpus.empty()) throw Error(Errc::config_error, "eval: corpus not set");
    fs::create_directories(config.out_dir);

    CorpusLoad corpus = load_dataset(config.corpus, config.label_set(), config.skip_errors);

    PromptLibrary prompts = PromptLibrary::load_dir(config.templates_dir);
    BackendSet backends = make_backend_set(config.backends, config.seed, config.cache_path());

    std::optional<ExperiencePool> mep, sep;
    if (!config.no_mep) mep.emplace(load_pool(config.mep_path()));
    if (!config.no_sep) sep.emplace(load_pool(config.sep_path()));

    ReasoningEnv env = make_env(backends, prompts, config, /*inference=*/true);

    struct Row {
        bool ok = false;
        InferenceResult result;
        std::string error;
    };
    std::vector<Row> rows(corpus.samples.size());
    std::exception_ptr first_error;
    std::mutex error_mu;

    auto work = [&](std::size_t i) {
        const Sample& sample = corpus.samples[i];
        try {
            auto image = load_sample_image(config.corpus, sample);
            rows[i].result = infer(sample, image, mep ? &*mep : nullptr, sep ? &*sep : nullptr, env);
            rows[i].ok = true;
        } catch (const std::exception& e) {
            rows[i].error = e.what();
            if (!config.skip_errors) {
                std::lock_guard lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    std::size_t workers = std::min<std::size_t>(config.workers, corpus.samples.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
            work(i);
            if (first_error) std::rethrow_exception(first_error);
        }
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                while (true) {
                    std::size_t i = cursor.fetch_add(1);
                    if (i >= corpus.samples.size()) break;
                    work(i);
                }
            });
        }
        for (auto& t : threads) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    EvalOutcome outcome;
    outcome.warnings = corpus.warnings;
    outcome.predictions_path = config.out_dir + "/predictions.jsonl";
    outcome.report_path = config.out_dir + "/report.json";

    std::ofstream preds_out(outcome.predictions_path, std::ios::trunc);
    if (!preds_out) throw Error(Errc::io_error, "cannot write " + outcome.predictions_path);

    std::vector<std::string> preds, golds, targets;
    std::vector<bool> fallbacks;
    bool all_labeled = true;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
        const Sample& sample = corpus.samples[i];
        if (!rows[i].ok) {
            outcome.samples_skipped += 1;
            outcome.warnings.push_back("eval: skipped sample " + sample.id + ": " + rows[i].error);
            continue;
        }
        const InferenceResult& r = rows[i].result;
        nlohmann::json j;
        j["id"] = sample.id;
        j["target"] = sample.target;
        if (sample.gold) j["gold"] = *sample.gold;
        j["predicted"] = r.label;
        j["rationale"] = r.rationale;
        j["parse_fallback"] = r.parse_fallback;
        j["me_hits"] = r.me_hit_ids;
        j["se_hits"] = r.se_hit_ids;
        preds_out << j.dump() << '\n';

        outcome.samples += 1;
        preds.push_back(r.label);
        targets.push_back(sample.target);
        fallbacks.push_back(r.parse_fallback);
        if (sample.gold)
            golds.push_back(*sample.gold);
        else
            all_labeled = false;
    }

    // Metrics need gold everywhere; a partially labeled corpus still gets
    // predictions but no metric section.
    if (!all_labeled) golds.clear();
    outcome.report = build_report(preds, golds, targets, fallbacks, config.label_set(), config.tag,
                                  backends.counters->snapshot());
    std::ofstream report_out(outcome.report_path, std::ios::trunc);
    if (!report_out) throw Error(Errc::io_error, "cannot write " + outcome.report_path);
    report_out << outcome.report.to_json().dump(2) << '\n';

    outcome.counters = backends.counters->snapshot();
    return outcome;
}

SweepOutcome sweep_tau(const RunConfig& config, const std::vector<double>& taus) {
    if (taus.empty()) throw Error(Errc::precondition, "sweep: no thresholds given");
    fs::create_directories(config.out_dir);

    SweepOutcome outcome;
    std::vector<double> unique;
    for (double t : taus) {
        if (std::find(unique.begin(), unique.end(), t) != unique.end()) {
            outcome.warnings.push_back("sweep: duplicate tau " + format_double(t) + " dropped");
            continue;
        }
        unique.push_back(t);
    }

    // One cache file shared across thresholds so unchanged prompts are never
    // re-issued.
    std::string shared_cache = config.cache ? config.cache_path() : std::string();

    for (double tau : unique) {
        RunConfig row_config = config;
        // pin the pool files before re-rooting out_dir, also pins the defaults
        row_config.mep_pool = config.mep_path();
        row_config.sep_pool = config.sep_path();
        row_config.tau = tau;
        // the sweep varies the effective threshold for both pools
        row_config.mep_tau.reset();
        row_config.sep_tau.reset();
        row_config.out_dir = config.out_dir + "/sweep/tau_" + format_double(tau);
        if (config.cache) row_config.cache_file = shared_cache;
        EvalOutcome eval = run_eval(row_config);
        if (!eval.report.has_metrics)
            throw Error(Errc::precondition, "sweep requires a fully labeled corpus");
        SweepRow row;
        row.tau = tau;
        row.macro_f1 = eval.report.macro_f1;
        auto it = eval.counters.find("backend.chat.requests");
        row.chat_requests = it == eval.counters.end() ? 0 : it->second;
        outcome.rows.push_back(row);
        for (const auto& w : eval.warnings) outcome.warnings.push_back(w);
    }

    outcome.csv_path = config.out_dir + "/sweep.csv";
    std::ofstream csv(outcome.csv_path, std::ios::trunc);
    if (!csv) throw Error(Errc::io_error, "cannot write " + outcome.csv_path);
    csv << "tau,macro_f1\n";
    for (const auto& row : outcome.rows)
        csv << format_double(row.tau) << ',' << format_double(row.macro_f1) << '\n';
    return outcome;
}

}  // namespace remod
