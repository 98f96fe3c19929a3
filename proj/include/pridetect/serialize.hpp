#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pridetect/corpus.hpp"
#include "pridetect/estimator.hpp"
#include "pridetect/harness.hpp"

namespace pridetect {

// A topic model with (optionally) the detection stats fitted from labelled
// engine sessions. `train` produces the model alone; `run` adds the stats.
struct ModelBundle {
    TopicModel model;
    std::optional<TopicStats> stats;
    double lambda_rmse = 0.0;
};

void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

// One externally supplied page to score: identified by a session id and the
// probe ordinal it was captured at.
struct PageRecord {
    std::string session_id;
    int probe_step = 1;
    ResponsePage page;
};

// Pages JSON: an array of objects with "session_id", "probe_step", optional
// "query", and "adverts"/"organic" arrays of {title, snippet, url}.
std::vector<PageRecord> load_pages_json(const std::string& path);

// Score dump: one CSV row per page x topic with columns
// session_id, probe_step, topic_label, pri_plus, z.
std::string render_scores_csv(const std::vector<PageRecord>& pages, const TopicModel& model,
                              const TopicStats& stats);

// report.json round-trip for the `report` subcommand.
void save_report_json(const DetectionReport& report, const std::string& path);
DetectionReport load_report_json(const std::string& path);

// Small file helpers shared by the writers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace pridetect
