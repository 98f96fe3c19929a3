#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pridetect/corpus.hpp"
#include "pridetect/deniability.hpp"
#include "pridetect/estimator.hpp"
#include "pridetect/scripting.hpp"
#include "pridetect/simengine.hpp"

namespace pridetect {

// Which part of the defense grid a campaign evaluates.
enum class GridKind { Full, Baseline };

// Fully resolved campaign configuration. Loaded from an INI file with an
// [engine] section (engine knobs), a [campaign] section (campaign knobs and
// data file paths), and optionally inline topic sections (any other section;
// the ones named in `proxy_sections` act as proxy topics). Data referenced by
// path is resolved relative to the config file and loaded eagerly.
struct CampaignConfig {
    EngineConfig engine;

    std::uint64_t seed = 1;
    int folds = 7;
    int sessions_per_cell = 28;
    int training_sessions_per_topic = 3;
    int probes_per_session = 5;
    std::string probe = "help and advice";
    bool fit_lambda_from_corpus = true;
    double lambda = 0.0; // used when fit_lambda_from_corpus is false
    double tf_threshold = 0.1;
    GridKind grid = GridKind::Full;
    std::string out_dir = "out";
    bool honor_waits = false;

    TopicCatalog catalog;
    std::vector<TopicRecord> proxy_topics;
    TrainingCorpus corpus;
    std::vector<std::string> noise_pool; // already filtered against sensitive terms
    std::set<std::string> stopwords;     // tokenizer stopword list

    void validate() const;
};

CampaignConfig load_campaign_config(const std::string& path);

// One point of the defense grid.
struct GridSpec {
    std::string id;       // e.g. "plain/high/noclick"
    bool proxy = false;   // proxy-topic defense active
    NoiseModel noise;
    ClickModel click;
};

std::vector<GridSpec> make_grid(GridKind kind, double tf_threshold);

// Results for one grid point x one sensitive topic, aggregated over folds.
struct CellResult {
    std::string cell_id; // "<grid id>/<topic label>"
    std::string defense;
    std::string noise;
    std::string click;
    int topic_id = 0;
    std::string topic_label;

    std::vector<double> probe_true;     // per probe step, mean over folds
    std::vector<double> probe_true_sem;
    double true_detect = 0.0;           // all probes pooled, mean over folds
    double true_sem = 0.0;
    double true_detect_late = 0.0;      // probes 3..K averaged
    double session_detect = 0.0;        // any-probe hit rate
    double session_sem = 0.0;
    std::vector<double> fold_true;      // per-fold all-probe rates (for audits)

    bool deltas_enabled = false;
    double delta_star = 0.0;            // mean over folds of per-session worst spread
    double delta_star_sem = 0.0;
    std::vector<double> delta_per_step; // mean spread per probe step
    double epsilon = 0.0;               // worst over sessions; may be +infinity
};

// False-detection results for one grid point, measured on background-topic
// control sessions (disjoint population from the cells above).
struct ControlResult {
    std::string cell_id; // "<grid id>/control"
    std::string defense;
    std::string noise;
    std::string click;

    std::vector<double> probe_false;    // detected-as-any-sensitive per probe step
    double false_detect = 0.0;          // all probes pooled, mean over folds
    double false_sem = 0.0;
    double session_false = 0.0;
    std::vector<double> fold_false;
    std::vector<double> false_as_topic; // per catalog topic: detected-as-that-topic rate
};

struct DetectionReport {
    double lambda = 0.0;
    double lambda_rmse = 0.0;
    double prior_rmse = 0.0;
    bool deltas_enabled = false;
    std::uint64_t seed = 0;
    int folds = 0;
    int sessions_per_cell = 0;
    int probes_per_session = 0;
    std::vector<std::string> labels;
    std::vector<CellResult> cells;
    std::vector<ControlResult> controls;
};

// Everything a campaign produces beyond the report.
struct CampaignArtifacts {
    DetectionReport report;
    TopicModel model;
    TopicStats stats;
};

CampaignArtifacts run_campaign_full(const CampaignConfig& config);
DetectionReport run_campaign(const CampaignConfig& config);

// Write report.csv (long format: one row per cell x metric), report.json and
// report.txt into `dir` (created if needed). Output depends only on the
// report contents — identical reports serialize to identical bytes.
void write_report(const DetectionReport& report, const std::string& dir);

// Human-readable table (the contents of report.txt).
std::string render_text_report(const DetectionReport& report);

// Parsed CSV row of report.csv.
struct CsvRow {
    std::string cell_id;
    std::string defense;
    std::string noise;
    std::string click;
    std::string topic;
    std::string metric;
    std::string value;
    std::string sem;
};

std::vector<CsvRow> parse_report_csv(const std::string& path);

// Fixed-precision float formatting used by every report writer ("inf"/"nan"
// for non-finite values); pinned so reruns are byte-identical.
std::string format_value(double v);
std::string format_percent(double rate); // 1.0 -> "100.0%", 0.0 -> "0.0%"

} // namespace pridetect
