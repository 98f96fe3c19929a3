// Command-line front end: train a topic model, run a defense-grid campaign
// against the simulated engine, score externally captured pages, and render
// stored reports.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pridetect/corpus.hpp"
#include "pridetect/errors.hpp"
#include "pridetect/harness.hpp"
#include "pridetect/serialize.hpp"

namespace fs = std::filesystem;
using namespace pridetect;

namespace {

struct TrainArgs {
    std::string corpus_path;
    std::string catalog_path;
    std::string stopword_path;
    double lambda = -1.0; // < 0: fit from the corpus
    std::string out_path = "model.json";
};

void cmd_train(const TrainArgs& args) {
    const TopicCatalog catalog = load_catalog(args.catalog_path);
    const TrainingCorpus corpus = load_corpus_tsv(args.corpus_path, catalog);
    const std::set<std::string> stopwords = args.stopword_path.empty()
                                                ? default_stopwords()
                                                : load_stopwords(args.stopword_path);
    ModelBundle bundle;
    if (args.lambda < 0.0) {
        const LambdaFit fit = fit_lambda(corpus, catalog, stopwords);
        bundle.model = fit_topic_model(corpus, catalog, fit.lambda, stopwords);
        bundle.lambda_rmse = fit.rmse;
        std::cout << "fitted smoothing weight " << format_value(fit.lambda)
                  << " (prior deviation rmse " << format_value(fit.rmse) << ")\n";
    } else {
        bundle.model = fit_topic_model(corpus, catalog, args.lambda, stopwords);
        bundle.lambda_rmse = bundle.model.prior_rmse_uniform();
        std::cout << "fixed smoothing weight " << format_value(args.lambda)
                  << " (prior deviation rmse " << format_value(bundle.lambda_rmse) << ")\n";
    }
    save_model(bundle, args.out_path);
    std::cout << "topics: " << bundle.model.topic_count() << ", dictionary: "
              << bundle.model.dictionary().size() << " words\n";
    std::cout << "model written to " << args.out_path << "\n";
}

struct RunArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    bool honor_waits = false;
};

void cmd_run(const RunArgs& args) {
    CampaignConfig config = load_campaign_config(args.config_path);
    if (args.seed_set) config.seed = args.seed;
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    if (args.honor_waits) config.honor_waits = true;

    const CampaignArtifacts artifacts = run_campaign_full(config);
    write_report(artifacts.report, config.out_dir);

    ModelBundle bundle;
    bundle.model = artifacts.model;
    bundle.stats = artifacts.stats;
    bundle.lambda_rmse = artifacts.report.lambda_rmse;
    save_model(bundle, (fs::path(config.out_dir) / "model.json").string());

    std::cout << render_text_report(artifacts.report);
    std::cout << "\nreport written to " << config.out_dir << "/report.{csv,json,txt}\n";
    std::cout << "model written to " << config.out_dir << "/model.json\n";
}

struct ScoreArgs {
    std::string model_path;
    std::string pages_path;
    std::string out_path;
};

void cmd_score(const ScoreArgs& args) {
    const ModelBundle bundle = load_model(args.model_path);
    if (!bundle.stats) {
        throw ConfigError(args.model_path +
                          ": model has no detection stats; use a model produced by 'run'");
    }
    const std::vector<PageRecord> pages = load_pages_json(args.pages_path);
    const std::string csv = render_scores_csv(pages, bundle.model, *bundle.stats);
    if (args.out_path.empty()) {
        std::cout << csv;
    } else {
        write_text_file(args.out_path, csv);
        std::cout << "scores written to " << args.out_path << "\n";
    }
}

void cmd_report(const std::string& in) {
    const fs::path p(in);
    const std::string file =
        fs::is_directory(p) ? (p / "report.json").string() : p.string();
    std::cout << render_text_report(load_report_json(file));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detects search-engine topic profiling from advert content and "
                 "evaluates obfuscation defenses against a simulated engine."};
    app.require_subcommand(1);

    TrainArgs train;
    CLI::App* train_cmd =
        app.add_subcommand("train", "Fit a topic model from a labelled advert corpus");
    train_cmd->add_option("--corpus", train.corpus_path, "labelled corpus TSV")->required();
    train_cmd->add_option("--catalog", train.catalog_path, "topic catalog file")->required();
    train_cmd->add_option("--lambda", train.lambda,
                          "fixed smoothing weight in [0,1); omit to fit from the corpus");
    train_cmd->add_option("--stopwords", train.stopword_path, "stopword list file");
    train_cmd->add_option("--out", train.out_path, "output model path")
        ->capture_default_str();
    train_cmd->callback([&] { cmd_train(train); });

    RunArgs run;
    CLI::App* run_cmd =
        app.add_subcommand("run", "Run a defense-grid campaign against the simulated engine");
    run_cmd->add_option("--config", run.config_path, "campaign config file")->required();
    CLI::Option* seed_opt = run_cmd->add_option("--seed", run.seed, "override the root seed");
    run_cmd->add_option("--out", run.out_dir, "override the output directory");
    run_cmd->add_flag("--honor-waits", run.honor_waits,
                      "sleep each step's wait time while running sessions");
    run_cmd->callback([&] {
        run.seed_set = seed_opt->count() > 0;
        cmd_run(run);
    });

    ScoreArgs score;
    CLI::App* score_cmd =
        app.add_subcommand("score", "Score captured result pages with a trained model");
    score_cmd->add_option("--model", score.model_path, "model produced by 'run'")->required();
    score_cmd->add_option("--pages", score.pages_path, "pages JSON file")->required();
    score_cmd->add_option("--out", score.out_path, "output CSV path (default: stdout)");
    score_cmd->callback([&] { cmd_score(score); });

    std::string report_in;
    CLI::App* report_cmd =
        app.add_subcommand("report", "Render a stored report as a text table");
    report_cmd->add_option("--in", report_in, "report directory or report.json path")
        ->required();
    report_cmd->callback([&] { cmd_report(report_in); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
