#include "pridetect/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace pridetect {

using nlohmann::json;

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    if (in.bad()) throw IoError("error while reading file: " + path);
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
    out.flush();
    if (!out) throw IoError("error while writing file: " + path);
}

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

namespace {

json parse_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("invalid JSON in " + path, 1);
    return j;
}

const json& need(const json& j, const char* key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + ": missing key '" + key + "'");
    return *it;
}

double need_number(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number()) throw ConfigError(path + ": key '" + key + "' must be a number");
    return v.get<double>();
}

std::string need_string(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_string()) throw ConfigError(path + ": key '" + key + "' must be a string");
    return v.get<std::string>();
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw ConfigError(what + ": expected " + std::to_string(rows) + " rows");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError(what + ": expected " + std::to_string(cols) +
                              " columns per row");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) throw ConfigError(what + ": matrix entries must be numbers");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

// JSON has no infinity literal; non-finite values travel as strings.
json number_or_inf(double v) {
    if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
    if (std::isnan(v)) return json("nan");
    return json(v);
}

double read_number_or_inf(const json& v, const std::string& what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ConfigError(what + ": expected a number or 'inf'/'-inf'/'nan'");
}

std::vector<double> doubles_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const json& v : j) out.push_back(read_number_or_inf(v, what));
    return out;
}

std::vector<std::string> strings_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array of strings");
    std::vector<std::string> out;
    out.reserve(j.size());
    for (const json& v : j) {
        if (!v.is_string()) throw ConfigError(what + ": expected an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Model bundle
// ---------------------------------------------------------------------------

void save_model(const ModelBundle& bundle, const std::string& path) {
    const TopicModel& model = bundle.model;
    json j;
    j["format"] = "topic-model";
    j["version"] = 1;
    j["lambda"] = model.lambda();
    j["lambda_rmse"] = bundle.lambda_rmse;
    j["labels"] = model.labels();
    j["dictionary"] = model.dictionary().words;
    j["counts"] = matrix_to_json(model.counts());
    if (bundle.stats) {
        json stats;
        stats["mean"] = matrix_to_json(bundle.stats->mean);
        stats["stddev"] = matrix_to_json(bundle.stats->stddev);
        j["stats"] = std::move(stats);
    }
    write_text_file(path, j.dump(2) + "\n");
}

ModelBundle load_model(const std::string& path) {
    const json j = parse_json_file(path);
    if (!j.is_object() || need_string(j, "format", path) != "topic-model") {
        throw ConfigError(path + ": not a topic model file");
    }
    const double lambda = need_number(j, "lambda", path);
    const std::vector<std::string> labels = strings_from_json(need(j, "labels", path), path);
    std::vector<std::string> words = strings_from_json(need(j, "dictionary", path), path);
    if (!std::is_sorted(words.begin(), words.end())) {
        throw ConfigError(path + ": model dictionary must be sorted");
    }
    Dictionary dict;
    dict.words = std::move(words);
    for (std::size_t i = 0; i < dict.words.size(); ++i) {
        dict.position.emplace(dict.words[i], static_cast<int>(i));
        dict.word_set.insert(dict.words[i]);
    }
    if (dict.position.size() != dict.words.size()) {
        throw ConfigError(path + ": model dictionary has duplicate words");
    }
    const Eigen::MatrixXd counts =
        matrix_from_json(need(j, "counts", path), static_cast<Eigen::Index>(labels.size()),
                         static_cast<Eigen::Index>(dict.words.size()), path + ": counts");

    ModelBundle bundle;
    bundle.model = TopicModel(labels, std::move(dict), lambda, counts);
    if (const auto it = j.find("lambda_rmse"); it != j.end() && it->is_number()) {
        bundle.lambda_rmse = it->get<double>();
    }
    if (const auto it = j.find("stats"); it != j.end()) {
        const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
        TopicStats stats;
        stats.mean = matrix_from_json(need(*it, "mean", path), n, n, path + ": stats.mean");
        stats.stddev =
            matrix_from_json(need(*it, "stddev", path), n, n, path + ": stats.stddev");
        bundle.stats = std::move(stats);
    }
    return bundle;
}

// ---------------------------------------------------------------------------
// Pages and scores
// ---------------------------------------------------------------------------

namespace {

std::vector<ResultItem> items_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array of items");
    std::vector<ResultItem> items;
    for (const json& v : j) {
        if (!v.is_object()) throw ConfigError(what + ": items must be objects");
        ResultItem item;
        if (const auto it = v.find("title"); it != v.end() && it->is_string()) {
            item.title = it->get<std::string>();
        }
        if (const auto it = v.find("snippet"); it != v.end() && it->is_string()) {
            item.snippet = it->get<std::string>();
        }
        if (const auto it = v.find("url"); it != v.end() && it->is_string()) {
            item.url = it->get<std::string>();
        }
        items.push_back(std::move(item));
    }
    return items;
}

} // namespace

std::vector<PageRecord> load_pages_json(const std::string& path) {
    const json j = parse_json_file(path);
    if (!j.is_array()) throw ConfigError(path + ": expected a JSON array of pages");
    std::vector<PageRecord> pages;
    int ordinal = 0;
    for (const json& v : j) {
        ++ordinal;
        if (!v.is_object()) throw ConfigError(path + ": pages must be objects");
        PageRecord record;
        if (const auto it = v.find("session_id"); it != v.end()) {
            if (it->is_string()) record.session_id = it->get<std::string>();
            else if (it->is_number_integer()) {
                record.session_id = std::to_string(it->get<long long>());
            } else throw ConfigError(path + ": session_id must be a string");
        } else {
            record.session_id = "session";
        }
        if (const auto it = v.find("probe_step"); it != v.end()) {
            if (!it->is_number_integer()) {
                throw ConfigError(path + ": probe_step must be an integer");
            }
            record.probe_step = it->get<int>();
        } else {
            record.probe_step = ordinal;
        }
        if (const auto it = v.find("query"); it != v.end() && it->is_string()) {
            record.page.query = it->get<std::string>();
        }
        if (const auto it = v.find("adverts"); it != v.end()) {
            record.page.adverts = items_from_json(*it, path + ": adverts");
        }
        if (const auto it = v.find("organic"); it != v.end()) {
            record.page.organic = items_from_json(*it, path + ": organic");
        }
        record.page.step_index = record.probe_step;
        record.page.is_probe = true;
        pages.push_back(std::move(record));
    }
    return pages;
}

std::string render_scores_csv(const std::vector<PageRecord>& pages, const TopicModel& model,
                              const TopicStats& stats) {
    if (stats.topic_count() != model.topic_count()) {
        throw ConfigError("score stats do not match the model's topic count");
    }
    std::ostringstream out;
    out << "session_id,probe_step,topic_label,pri_plus,z\n";
    for (const PageRecord& record : pages) {
        const PriScoreVector scores = pri_plus_score(record.page, model);
        const NormalizedScore z = normalize(scores, stats);
        for (int t = 0; t < model.topic_count(); ++t) {
            out << record.session_id << ',' << record.probe_step << ','
                << model.labels()[static_cast<std::size_t>(t)] << ','
                << format_value(scores[t]) << ',' << format_value(z[t]) << '\n';
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Report JSON
// ---------------------------------------------------------------------------

void save_report_json(const DetectionReport& report, const std::string& path) {
    json j;
    j["format"] = "detection-report";
    j["version"] = 1;
    j["lambda"] = report.lambda;
    j["lambda_rmse"] = report.lambda_rmse;
    j["prior_rmse"] = report.prior_rmse;
    j["deltas_enabled"] = report.deltas_enabled;
    j["seed"] = report.seed;
    j["folds"] = report.folds;
    j["sessions_per_cell"] = report.sessions_per_cell;
    j["probes_per_session"] = report.probes_per_session;
    j["labels"] = report.labels;
    json cells = json::array();
    for (const CellResult& cell : report.cells) {
        json c;
        c["cell_id"] = cell.cell_id;
        c["defense"] = cell.defense;
        c["noise"] = cell.noise;
        c["click"] = cell.click;
        c["topic_id"] = cell.topic_id;
        c["topic_label"] = cell.topic_label;
        c["probe_true"] = cell.probe_true;
        c["probe_true_sem"] = cell.probe_true_sem;
        c["true_detect"] = cell.true_detect;
        c["true_sem"] = cell.true_sem;
        c["true_detect_late"] = cell.true_detect_late;
        c["session_detect"] = cell.session_detect;
        c["session_sem"] = cell.session_sem;
        c["fold_true"] = cell.fold_true;
        c["deltas_enabled"] = cell.deltas_enabled;
        if (cell.deltas_enabled) {
            c["delta_star"] = cell.delta_star;
            c["delta_star_sem"] = cell.delta_star_sem;
            c["delta_per_step"] = cell.delta_per_step;
            c["epsilon"] = number_or_inf(cell.epsilon);
        }
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    json controls = json::array();
    for (const ControlResult& control : report.controls) {
        json c;
        c["cell_id"] = control.cell_id;
        c["defense"] = control.defense;
        c["noise"] = control.noise;
        c["click"] = control.click;
        c["probe_false"] = control.probe_false;
        c["false_detect"] = control.false_detect;
        c["false_sem"] = control.false_sem;
        c["session_false"] = control.session_false;
        c["fold_false"] = control.fold_false;
        c["false_as_topic"] = control.false_as_topic;
        controls.push_back(std::move(c));
    }
    j["controls"] = std::move(controls);
    write_text_file(path, j.dump(2) + "\n");
}

DetectionReport load_report_json(const std::string& path) {
    const json j = parse_json_file(path);
    if (!j.is_object() || need_string(j, "format", path) != "detection-report") {
        throw ConfigError(path + ": not a detection report file");
    }
    DetectionReport report;
    report.lambda = need_number(j, "lambda", path);
    report.lambda_rmse = need_number(j, "lambda_rmse", path);
    report.prior_rmse = need_number(j, "prior_rmse", path);
    report.deltas_enabled = need(j, "deltas_enabled", path).get<bool>();
    report.seed = need(j, "seed", path).get<std::uint64_t>();
    report.folds = static_cast<int>(need_number(j, "folds", path));
    report.sessions_per_cell = static_cast<int>(need_number(j, "sessions_per_cell", path));
    report.probes_per_session = static_cast<int>(need_number(j, "probes_per_session", path));
    report.labels = strings_from_json(need(j, "labels", path), path);
    for (const json& c : need(j, "cells", path)) {
        CellResult cell;
        cell.cell_id = need_string(c, "cell_id", path);
        cell.defense = need_string(c, "defense", path);
        cell.noise = need_string(c, "noise", path);
        cell.click = need_string(c, "click", path);
        cell.topic_id = static_cast<int>(need_number(c, "topic_id", path));
        cell.topic_label = need_string(c, "topic_label", path);
        cell.probe_true = doubles_from_json(need(c, "probe_true", path), path);
        cell.probe_true_sem = doubles_from_json(need(c, "probe_true_sem", path), path);
        cell.true_detect = need_number(c, "true_detect", path);
        cell.true_sem = need_number(c, "true_sem", path);
        cell.true_detect_late = need_number(c, "true_detect_late", path);
        cell.session_detect = need_number(c, "session_detect", path);
        cell.session_sem = need_number(c, "session_sem", path);
        cell.fold_true = doubles_from_json(need(c, "fold_true", path), path);
        cell.deltas_enabled = need(c, "deltas_enabled", path).get<bool>();
        if (cell.deltas_enabled) {
            cell.delta_star = need_number(c, "delta_star", path);
            cell.delta_star_sem = need_number(c, "delta_star_sem", path);
            cell.delta_per_step = doubles_from_json(need(c, "delta_per_step", path), path);
            cell.epsilon = read_number_or_inf(need(c, "epsilon", path), path + ": epsilon");
        }
        report.cells.push_back(std::move(cell));
    }
    for (const json& c : need(j, "controls", path)) {
        ControlResult control;
        control.cell_id = need_string(c, "cell_id", path);
        control.defense = need_string(c, "defense", path);
        control.noise = need_string(c, "noise", path);
        control.click = need_string(c, "click", path);
        control.probe_false = doubles_from_json(need(c, "probe_false", path), path);
        control.false_detect = need_number(c, "false_detect", path);
        control.false_sem = need_number(c, "false_sem", path);
        control.session_false = need_number(c, "session_false", path);
        control.fold_false = doubles_from_json(need(c, "fold_false", path), path);
        control.false_as_topic = doubles_from_json(need(c, "false_as_topic", path), path);
        report.controls.push_back(std::move(control));
    }
    return report;
}

} // namespace pridetect
