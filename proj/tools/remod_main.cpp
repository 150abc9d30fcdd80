#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "remod/config.hpp"
#include "remod/error.hpp"
#include "remod/pool.hpp"
#include "remod/runner.hpp"
#include "remod/util.hpp"

namespace {

// Flags shared by train/eval/sweep. Every flag mirrors a config-file key and
// overrides it when given on the command line.
struct CommonArgs {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;  // key -> value

    void add_to(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Config file (key = value with [sections])");
        auto add_override = [this, cmd](const std::string& flag, const std::string& key,
                                        const std::string& help) {
            cmd->add_option_function<std::string>(
                flag, [this, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
        };
        add_override("--alpha", "alpha", "Text-side weight of the relevance fusion [0,1]");
        add_override("--tau", "tau", "Relevance threshold (-1,1]");
        add_override("--k", "k", "Experiences retrieved per pool");
        add_override("--labels", "labels", "Comma-separated label set");
        add_override("--fallback-label", "fallback_label", "Label used when a reply is unparseable");
        add_override("--corpus", "corpus", "JSONL corpus path");
        add_override("--mep-pool", "mep_pool", "Modality experience pool file");
        add_override("--sep-pool", "sep_pool", "Semantic experience pool file");
        add_override("--templates", "templates", "Prompt template directory");
        add_override("--out", "out", "Output directory");
        add_override("--epochs", "epochs", "Training passes over the corpus");
        add_override("--seed", "seed", "Seed for mock backends");
        add_override("--workers", "workers", "Parallel inference workers");
        add_override("--tag", "tag", "Report tag (e.g. in-target, zero-shot)");
        add_override("--cache-file", "cache_file", "Response cache file");

        auto add_flag = [this, cmd](const std::string& flag, const std::string& key,
                                    const std::string& help) {
            cmd->add_flag_callback(
                flag, [this, key] { overrides.emplace_back(key, "true"); }, help);
        };
        add_flag("--no-mep", "no_mep", "Disable the modality experience pool");
        add_flag("--no-sep", "no_sep", "Disable the semantic experience pool");
        add_flag("--no-cot", "no_cot", "Disable reflection and pool evolution");
        add_flag("--resume", "resume", "Continue training from the last persisted state");
        add_flag("--skip-errors", "skip_errors", "Log and skip bad samples instead of aborting");
        add_flag("--cache", "cache", "Enable the on-disk chat response cache");
        add_flag("--infer-knowledge", "infer_knowledge",
                 "Run knowledge perception at inference too");
    }

    remod::RunConfig resolve() const {
        remod::RunConfig config;
        if (!config_path.empty()) config = remod::parse_config_file(config_path);
        for (const auto& [key, value] : overrides) remod::apply_config_kv(config, "", key, value);
        return config;
    }
};

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_train(const CommonArgs& args) {
    auto outcome = remod::run_train(args.resolve());
    print_warnings(outcome.warnings);
    std::cout << "trained on " << outcome.samples_processed << " sample(s)";
    if (outcome.samples_skipped) std::cout << " (" << outcome.samples_skipped << " skipped)";
    std::cout << "\n  MEP:    " << outcome.mep_path << "\n  SEP:    " << outcome.sep_path
              << "\n  traces: " << outcome.trace_path << '\n';
    return 0;
}

int cmd_eval(const CommonArgs& args) {
    auto outcome = remod::run_eval(args.resolve());
    print_warnings(outcome.warnings);
    std::cout << "evaluated " << outcome.samples << " sample(s)";
    if (outcome.samples_skipped) std::cout << " (" << outcome.samples_skipped << " skipped)";
    std::cout << '\n';
    if (outcome.report.has_metrics)
        std::cout << "macro-F1: " << remod::format_double(outcome.report.macro_f1) << '\n';
    else
        std::cout << "corpus not fully labeled; metrics omitted\n";
    std::cout << "predictions: " << outcome.predictions_path << "\nreport:      "
              << outcome.report_path << '\n';
    return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& taus_csv) {
    std::vector<double> taus;
    for (const auto& part : remod::split(taus_csv, ',')) {
        if (part.empty()) continue;
        taus.push_back(std::stod(part));
    }
    auto outcome = remod::sweep_tau(args.resolve(), taus);
    print_warnings(outcome.warnings);
    std::cout << "tau,macro_f1\n";
    for (const auto& row : outcome.rows)
        std::cout << remod::format_double(row.tau) << ',' << remod::format_double(row.macro_f1)
                  << '\n';
    std::cout << "written to " << outcome.csv_path << '\n';
    return 0;
}

int cmd_inspect_pool(const std::string& path, bool full) {
    remod::ExperiencePool pool = remod::load_pool(path);
    std::cout << remod::pool_kind_name(pool.kind()) << " pool, " << pool.size()
              << " experience(s), d_t=" << pool.d_text() << " d_v=" << pool.d_visual()
              << ", step " << pool.step() << '\n';
    for (const auto& e : pool.entries()) {
        std::cout << "#" << e.id << " rev " << e.revision << " created@" << e.created_at
                  << " updated@" << e.updated_at << " sources=[";
        for (std::size_t i = 0; i < e.source_samples.size(); ++i) {
            if (i) std::cout << ", ";
            std::cout << e.source_samples[i];
        }
        std::cout << "]\n";
        if (full) {
            std::cout << "  " << e.payload << '\n';
        } else {
            std::string excerpt = e.payload.substr(0, 100);
            if (e.payload.size() > 100) excerpt += "...";
            std::cout << "  " << excerpt << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ReMoD: dual-reasoning multimodal stance detection pipeline"};
    app.require_subcommand(1);

    CommonArgs train_args, eval_args, sweep_args;
    std::string taus_csv = "0.1,0.3,0.5,0.7,0.8,0.9";
    std::string pool_path;
    bool inspect_full = false;

    auto* train = app.add_subcommand("train", "Accumulate experience pools over a labeled corpus");
    train_args.add_to(train);

    auto* eval = app.add_subcommand("eval", "Run stance inference and report Macro-F1");
    eval_args.add_to(eval);

    auto* sweep = app.add_subcommand("sweep", "Evaluate across relevance thresholds");
    sweep_args.add_to(sweep);
    sweep->add_option("--taus", taus_csv, "Comma-separated thresholds to sweep");

    auto* inspect = app.add_subcommand("inspect-pool", "Pretty-print an experience pool file");
    inspect->add_option("pool", pool_path, "Pool JSONL file")->required();
    inspect->add_flag("--full", inspect_full, "Print full payloads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(train_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args, taus_csv);
        if (inspect->parsed()) return cmd_inspect_pool(pool_path, inspect_full);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
