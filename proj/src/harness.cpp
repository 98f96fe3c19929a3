#include "pridetect/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <utility>

#include "pridetect/rng.hpp"
#include "pridetect/serialize.hpp"
#include "pridetect/strutil.hpp"

namespace fs = std::filesystem;

namespace pridetect {

// ---------------------------------------------------------------------------
// Campaign configuration
// ---------------------------------------------------------------------------

void CampaignConfig::validate() const {
    engine.validate();
    if (folds < 2) throw ConfigError("campaign needs at least 2 folds");
    if (sessions_per_cell < folds) {
        throw ConfigError("sessions_per_cell must be at least the fold count");
    }
    if (training_sessions_per_topic < 1) {
        throw ConfigError("need at least one training session per topic");
    }
    if (probes_per_session < 2) throw ConfigError("sessions need at least two probes");
    if (training_sessions_per_topic * probes_per_session < 2) {
        throw ConfigError("training must yield at least two pages per topic");
    }
    if (!(tf_threshold > 0.0 && tf_threshold < 1.0)) {
        throw ConfigError("tf_threshold must lie strictly between 0 and 1");
    }
    if (!fit_lambda_from_corpus && !(lambda >= 0.0 && lambda < 1.0)) {
        throw ConfigError("fixed smoothing weight must lie in [0, 1)");
    }
    if (probe.empty()) throw ConfigError("campaign needs a probe query");
    if (out_dir.empty()) throw ConfigError("campaign needs an output directory");
    catalog.validate();
    for (int t = 1; t < catalog.size(); ++t) {
        if (catalog[t].queries.size() < 4) {
            throw ConfigError("topic '" + catalog[t].label +
                              "' needs at least 4 example queries");
        }
    }
    if (corpus.entries.empty()) throw ConfigError("campaign needs a training corpus");
    if (noise_pool.empty()) {
        throw ConfigError("campaign needs a non-empty cover query pool "
                          "(after filtering against sensitive terms)");
    }
    if (grid == GridKind::Full) {
        if (proxy_topics.empty()) {
            throw ConfigError("the full grid includes proxy defenses: provide proxy topics");
        }
        for (const TopicRecord& proxy : proxy_topics) {
            if (proxy.keyword_stems.empty()) {
                throw ConfigError("proxy topic '" + proxy.label + "' has no usable keywords");
            }
            if (proxy.queries.size() < 4) {
                throw ConfigError("proxy topic '" + proxy.label +
                                  "' needs at least 4 queries");
            }
        }
    }
}

namespace {

struct IniEntry {
    std::string value;
    int lineno = 0;
};

using IniSection = std::map<std::string, IniEntry>;

long to_long(const IniEntry& entry, const std::string& key) {
    try {
        std::size_t used = 0;
        const long v = std::stol(entry.value, &used);
        if (used != entry.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config value for '" + key + "' must be an integer (line " +
                          std::to_string(entry.lineno) + ")");
    }
}

double to_double(const IniEntry& entry, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(entry.value, &used);
        if (used != entry.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config value for '" + key + "' must be a number (line " +
                          std::to_string(entry.lineno) + ")");
    }
}

bool to_bool(const IniEntry& entry, const std::string& key) {
    const std::string v = to_lower_ascii(entry.value);
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError("config value for '" + key + "' must be a boolean (line " +
                      std::to_string(entry.lineno) + ")");
}

std::uint64_t to_u64(const IniEntry& entry, const std::string& key) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(entry.value, &used);
        if (used != entry.value.size()) throw std::invalid_argument("");
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("config value for '" + key +
                          "' must be a non-negative integer (line " +
                          std::to_string(entry.lineno) + ")");
    }
}

// Split the config into key=value sections ([engine]/[campaign]) and the
// remaining text (inline topic sections), the latter with original line
// numbers preserved by blanking out foreign lines.
void split_config(const std::string& text, IniSection& engine, IniSection& campaign,
                  std::string& topic_text, bool& has_topics) {
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    std::string section; // current section name, lowercased
    std::ostringstream topics;
    has_topics = false;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim_copy(raw);
        const bool is_kv_section = section == "engine" || section == "campaign";
        if (!line.empty() && line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError("unterminated section header", lineno);
            }
            section = to_lower_ascii(trim_copy(std::string_view(line).substr(1, line.size() - 2)));
            if (section == "engine" || section == "campaign") {
                topics << '\n';
            } else {
                has_topics = true;
                topics << raw << '\n';
            }
            continue;
        }
        if (section.empty()) {
            if (!line.empty() && line.front() != '#' && line.front() != ';') {
                throw ParseError("content before any [section] header", lineno);
            }
            topics << '\n';
            continue;
        }
        if (is_kv_section) {
            topics << '\n';
            if (line.empty() || line.front() == '#' || line.front() == ';') continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                throw ParseError("expected 'key = value' in [" + section + "]", lineno);
            }
            const std::string key = to_lower_ascii(trim_copy(std::string_view(line).substr(0, eq)));
            const std::string value = trim_copy(std::string_view(line).substr(eq + 1));
            if (key.empty()) throw ParseError("empty config key", lineno);
            IniSection& target = section == "engine" ? engine : campaign;
            if (!target.emplace(key, IniEntry{value, lineno}).second) {
                throw ParseError("duplicate config key '" + key + "'", lineno);
            }
        } else {
            topics << raw << '\n';
        }
    }
    topic_text = topics.str();
}

void apply_engine_keys(const IniSection& section, EngineConfig& engine) {
    for (const auto& [key, entry] : section) {
        if (key == "learning_rate") engine.learning_rate = to_double(entry, key);
        else if (key == "click_weight") engine.click_weight = to_double(entry, key);
        else if (key == "ads_min") engine.ads_min = static_cast<int>(to_long(entry, key));
        else if (key == "ads_max") engine.ads_max = static_cast<int>(to_long(entry, key));
        else if (key == "decay") engine.decay = to_double(entry, key);
        else if (key == "organic_per_page") {
            engine.organic_per_page = static_cast<int>(to_long(entry, key));
        } else if (key == "profile_sharpness") engine.profile_sharpness = to_double(entry, key);
        else {
            throw ConfigError("unknown [engine] key '" + key + "' (line " +
                              std::to_string(entry.lineno) + ")");
        }
    }
}

std::string resolve_path(const std::string& config_path, const std::string& value) {
    const fs::path p(value);
    if (p.is_absolute()) return value;
    return (fs::path(config_path).parent_path() / p).string();
}

} // namespace

CampaignConfig load_campaign_config(const std::string& path) {
    const std::string text = read_text_file(path);
    IniSection engine_keys, campaign_keys;
    std::string topic_text;
    bool has_topics = false;
    split_config(text, engine_keys, campaign_keys, topic_text, has_topics);

    CampaignConfig config;
    apply_engine_keys(engine_keys, config.engine);

    std::string catalog_path, corpus_path, proxy_path, pool_path, stopword_path;
    std::vector<std::string> proxy_sections;
    for (const auto& [key, entry] : campaign_keys) {
        if (key == "seed") config.seed = to_u64(entry, key);
        else if (key == "folds") config.folds = static_cast<int>(to_long(entry, key));
        else if (key == "sessions_per_cell") {
            config.sessions_per_cell = static_cast<int>(to_long(entry, key));
        } else if (key == "training_sessions" || key == "training_sessions_per_topic") {
            config.training_sessions_per_topic = static_cast<int>(to_long(entry, key));
        } else if (key == "probes_per_session") {
            config.probes_per_session = static_cast<int>(to_long(entry, key));
        } else if (key == "probe") config.probe = entry.value;
        else if (key == "lambda") {
            if (to_lower_ascii(entry.value) == "fit") {
                config.fit_lambda_from_corpus = true;
            } else {
                config.fit_lambda_from_corpus = false;
                config.lambda = to_double(entry, key);
            }
        } else if (key == "tf_threshold") config.tf_threshold = to_double(entry, key);
        else if (key == "grid") {
            const std::string v = to_lower_ascii(entry.value);
            if (v == "full") config.grid = GridKind::Full;
            else if (v == "baseline") config.grid = GridKind::Baseline;
            else {
                throw ConfigError("unknown grid '" + entry.value + "' (line " +
                                  std::to_string(entry.lineno) + ")");
            }
        } else if (key == "out") config.out_dir = entry.value;
        else if (key == "honor_waits") config.honor_waits = to_bool(entry, key);
        else if (key == "catalog") catalog_path = entry.value;
        else if (key == "corpus") corpus_path = entry.value;
        else if (key == "proxy_topics") proxy_path = entry.value;
        else if (key == "noise_pool") pool_path = entry.value;
        else if (key == "stopwords") stopword_path = entry.value;
        else if (key == "proxy_sections") proxy_sections = split_ws(entry.value);
        else {
            throw ConfigError("unknown [campaign] key '" + key + "' (line " +
                              std::to_string(entry.lineno) + ")");
        }
    }

    config.stopwords = stopword_path.empty()
                           ? default_stopwords()
                           : load_stopwords(resolve_path(path, stopword_path));

    // Topics: inline sections or a catalog file, never both.
    if (has_topics && !catalog_path.empty()) {
        throw ConfigError("config declares both inline topic sections and a catalog file");
    }
    if (has_topics) {
        std::vector<TopicRecord> records = parse_topic_sections(topic_text);
        std::vector<TopicRecord> catalog_records;
        for (TopicRecord& record : records) {
            const bool is_proxy = std::find(proxy_sections.begin(), proxy_sections.end(),
                                            record.label) != proxy_sections.end();
            (is_proxy ? config.proxy_topics : catalog_records).push_back(std::move(record));
        }
        if (config.proxy_topics.size() != proxy_sections.size()) {
            throw ConfigError("a name in proxy_sections does not match any inline section");
        }
        config.catalog = catalog_from_records(std::move(catalog_records));
    } else {
        if (catalog_path.empty()) {
            throw ConfigError("config needs either a catalog file or inline topic sections");
        }
        config.catalog = load_catalog(resolve_path(path, catalog_path));
        if (!proxy_sections.empty()) {
            throw ConfigError("proxy_sections only applies to inline topic sections");
        }
    }
    if (!proxy_path.empty()) {
        if (!config.proxy_topics.empty()) {
            throw ConfigError("config declares both inline proxy sections and a proxy file");
        }
        config.proxy_topics = load_topic_sections(resolve_path(path, proxy_path));
    }

    if (corpus_path.empty()) throw ConfigError("config needs a corpus file");
    config.corpus = load_corpus_tsv(resolve_path(path, corpus_path), config.catalog);

    if (pool_path.empty()) throw ConfigError("config needs a cover query pool file");
    config.noise_pool =
        filter_query_pool(load_query_pool(resolve_path(path, pool_path)), config.catalog);

    config.validate();
    return config;
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

std::vector<GridSpec> make_grid(GridKind kind, double tf_threshold) {
    auto spec = [&](bool proxy, NoiseModel::Level noise, ClickModel::Kind click) {
        GridSpec s;
        s.proxy = proxy;
        s.noise = NoiseModel{noise};
        s.click = ClickModel{click, tf_threshold};
        s.id = std::string(proxy ? "proxy" : "plain") + "/" + noise_level_name(noise) + "/" +
               click_kind_name(click);
        return s;
    };
    std::vector<GridSpec> grid;
    grid.push_back(spec(false, NoiseModel::Level::None, ClickModel::Kind::NoClick));
    if (kind == GridKind::Baseline) return grid;
    grid.push_back(spec(false, NoiseModel::Level::Low, ClickModel::Kind::NoClick));
    grid.push_back(spec(false, NoiseModel::Level::Medium, ClickModel::Kind::NoClick));
    grid.push_back(spec(false, NoiseModel::Level::High, ClickModel::Kind::NoClick));
    grid.push_back(spec(false, NoiseModel::Level::None, ClickModel::Kind::ClickRelevant));
    grid.push_back(spec(false, NoiseModel::Level::None, ClickModel::Kind::ClickNonRelevant));
    grid.push_back(spec(false, NoiseModel::Level::None, ClickModel::Kind::ClickAll));
    grid.push_back(spec(false, NoiseModel::Level::None, ClickModel::Kind::ClickTwoRandom));
    grid.push_back(spec(true, NoiseModel::Level::None, ClickModel::Kind::NoClick));
    grid.push_back(spec(true, NoiseModel::Level::None, ClickModel::Kind::ClickRelevant));
    grid.push_back(spec(true, NoiseModel::Level::None, ClickModel::Kind::ClickNonRelevant));
    grid.push_back(spec(true, NoiseModel::Level::None, ClickModel::Kind::ClickAll));
    grid.push_back(spec(true, NoiseModel::Level::None, ClickModel::Kind::ClickTwoRandom));
    return grid;
}

// ---------------------------------------------------------------------------
// Campaign execution
// ---------------------------------------------------------------------------

namespace {

// mean and standard error of per-fold rates
std::pair<double, double> fold_stats(const std::vector<double>& per_fold) {
    const double n = static_cast<double>(per_fold.size());
    double mean = 0.0;
    for (double v : per_fold) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : per_fold) var += (v - mean) * (v - mean);
    var /= n - 1.0;
    return {mean, std::sqrt(var) / std::sqrt(n)};
}

// hit counters partitioned by fold
class FoldCounter {
public:
    explicit FoldCounter(int folds) : hits_(static_cast<std::size_t>(folds), 0),
                                      totals_(static_cast<std::size_t>(folds), 0) {}

    void add(int fold, bool hit) {
        totals_[static_cast<std::size_t>(fold)] += 1;
        if (hit) hits_[static_cast<std::size_t>(fold)] += 1;
    }

    std::vector<double> rates() const {
        std::vector<double> out(hits_.size(), 0.0);
        for (std::size_t f = 0; f < hits_.size(); ++f) {
            out[f] = totals_[f] > 0 ? static_cast<double>(hits_[f]) /
                                          static_cast<double>(totals_[f])
                                    : 0.0;
        }
        return out;
    }

private:
    std::vector<long> hits_;
    std::vector<long> totals_;
};

struct SessionOutcome {
    std::vector<int> detections;          // per probe step
    std::vector<PriScoreVector> scores;   // per probe step
};

SessionOutcome score_session(const std::vector<ProbeObservation>& observations,
                             const TopicModel& model, const TopicStats& stats) {
    SessionOutcome outcome;
    outcome.detections.reserve(observations.size());
    outcome.scores.reserve(observations.size());
    for (const ProbeObservation& obs : observations) {
        PriScoreVector scores = pri_plus_score(obs.page, model);
        outcome.detections.push_back(detect(normalize(scores, stats)));
        outcome.scores.push_back(std::move(scores));
    }
    return outcome;
}

SessionPlan make_plan(const CampaignConfig& config, const GridSpec& spec, int topic_id,
                      const std::vector<std::string>& queries, const std::string& scope,
                      int session_index) {
    const auto seed_for = [&](const char* role) {
        return derive_seed(config.seed, scope + "/" + role,
                           static_cast<std::uint64_t>(session_index));
    };
    SessionPlan plan;
    if (spec.proxy) {
        const TopicRecord& proxy =
            config.proxy_topics[static_cast<std::size_t>(session_index) %
                                config.proxy_topics.size()];
        plan = build_proxy_session(topic_id, queries, proxy, config.probe, seed_for("plan"),
                                   config.probes_per_session);
    } else {
        plan = build_session(topic_id, queries, config.probe, seed_for("plan"),
                             config.probes_per_session);
        if (spec.noise.ratio() > 0) {
            plan = inject_noise(plan, spec.noise, config.noise_pool, seed_for("noise"));
        }
    }
    plan.click_model = spec.click;
    plan.noise_model = spec.noise;
    return plan;
}

} // namespace

CampaignArtifacts run_campaign_full(const CampaignConfig& config) {
    config.validate();

    const double lambda =
        config.fit_lambda_from_corpus
            ? fit_lambda(config.corpus, config.catalog, config.stopwords).lambda
            : config.lambda;
    TopicModel model = fit_topic_model(config.corpus, config.catalog, lambda, config.stopwords);
    const AdInventory inventory = build_inventory(config.catalog, config.proxy_topics);

    const int topics = config.catalog.size();
    const int probes = config.probes_per_session;

    // Training: labelled sessions per topic feed the per-topic score stats.
    std::vector<std::pair<int, PriScoreVector>> labelled;
    for (int t = 0; t < topics; ++t) {
        const std::string& label = config.catalog[t].label;
        const std::vector<std::string>& queries =
            t == 0 ? config.noise_pool : config.catalog[t].queries;
        for (int s = 0; s < config.training_sessions_per_topic; ++s) {
            const std::string scope = "train/" + label;
            SessionPlan plan = build_session(
                t, queries, config.probe,
                derive_seed(config.seed, scope + "/plan", static_cast<std::uint64_t>(s)),
                probes);
            EngineConfig engine = config.engine;
            engine.seed =
                derive_seed(config.seed, scope + "/engine", static_cast<std::uint64_t>(s));
            for (const ProbeObservation& obs :
                 run_session(plan, engine, inventory, config.honor_waits)) {
                labelled.emplace_back(t, pri_plus_score(obs.page, model));
            }
        }
    }
    const TopicStats stats = fit_topic_stats_from_scores(labelled, topics);

    DetectionReport report;
    report.lambda = lambda;
    report.lambda_rmse = model.prior_rmse_uniform();
    report.prior_rmse = model.prior_rmse_uniform();
    report.deltas_enabled = report.prior_rmse <= kUniformPriorRmseLimit;
    report.seed = config.seed;
    report.folds = config.folds;
    report.sessions_per_cell = config.sessions_per_cell;
    report.probes_per_session = probes;
    report.labels = model.labels();

    for (const GridSpec& spec : make_grid(config.grid, config.tf_threshold)) {
        // Control population: background sessions under the same defense.
        {
            ControlResult control;
            control.cell_id = spec.id + "/control";
            control.defense = spec.proxy ? "proxy" : "plain";
            control.noise = noise_level_name(spec.noise.level);
            control.click = click_kind_name(spec.click.kind);

            FoldCounter all_probes(config.folds);
            FoldCounter sessions(config.folds);
            std::vector<FoldCounter> per_probe(static_cast<std::size_t>(probes),
                                               FoldCounter(config.folds));
            std::vector<long> as_topic(static_cast<std::size_t>(topics), 0);
            long probe_count = 0;

            const std::string scope = spec.id + "/control";
            for (int s = 0; s < config.sessions_per_cell; ++s) {
                const int fold = s % config.folds;
                SessionPlan plan = make_plan(config, spec, 0, config.noise_pool, scope, s);
                EngineConfig engine = config.engine;
                engine.seed = derive_seed(config.seed, scope + "/engine",
                                          static_cast<std::uint64_t>(s));
                const SessionOutcome outcome = score_session(
                    run_session(plan, engine, inventory, config.honor_waits), model, stats);
                bool any = false;
                for (std::size_t k = 0; k < outcome.detections.size(); ++k) {
                    const int det = outcome.detections[k];
                    const bool hit = det != 0; // flagged as some sensitive topic
                    any = any || hit;
                    all_probes.add(fold, hit);
                    per_probe[k].add(fold, hit);
                    as_topic[static_cast<std::size_t>(det)] += 1;
                    ++probe_count;
                }
                sessions.add(fold, any);
            }
            std::tie(control.false_detect, control.false_sem) = fold_stats(all_probes.rates());
            control.fold_false = all_probes.rates();
            control.session_false = fold_stats(sessions.rates()).first;
            for (const FoldCounter& counter : per_probe) {
                control.probe_false.push_back(fold_stats(counter.rates()).first);
            }
            for (long count : as_topic) {
                control.false_as_topic.push_back(static_cast<double>(count) /
                                                 static_cast<double>(probe_count));
            }
            report.controls.push_back(std::move(control));
        }

        // Sensitive cells.
        for (int t = 1; t < topics; ++t) {
            const std::string& label = config.catalog[t].label;
            CellResult cell;
            cell.cell_id = spec.id + "/" + label;
            cell.defense = spec.proxy ? "proxy" : "plain";
            cell.noise = noise_level_name(spec.noise.level);
            cell.click = click_kind_name(spec.click.kind);
            cell.topic_id = t;
            cell.topic_label = label;
            cell.deltas_enabled = report.deltas_enabled;

            FoldCounter all_probes(config.folds);
            FoldCounter sessions(config.folds);
            std::vector<FoldCounter> per_probe(static_cast<std::size_t>(probes),
                                               FoldCounter(config.folds));
            std::vector<std::vector<double>> fold_deltas(
                static_cast<std::size_t>(config.folds));
            std::vector<double> delta_step_sum(static_cast<std::size_t>(probes), 0.0);
            double epsilon_worst = 0.0;

            const std::string scope = cell.cell_id;
            for (int s = 0; s < config.sessions_per_cell; ++s) {
                const int fold = s % config.folds;
                SessionPlan plan =
                    make_plan(config, spec, t, config.catalog[t].queries, scope, s);
                EngineConfig engine = config.engine;
                engine.seed = derive_seed(config.seed, scope + "/engine",
                                          static_cast<std::uint64_t>(s));
                const SessionOutcome outcome = score_session(
                    run_session(plan, engine, inventory, config.honor_waits), model, stats);
                bool any = false;
                for (std::size_t k = 0; k < outcome.detections.size(); ++k) {
                    const bool hit = outcome.detections[k] == t;
                    any = any || hit;
                    all_probes.add(fold, hit);
                    per_probe[k].add(fold, hit);
                }
                sessions.add(fold, any);
                if (report.deltas_enabled) {
                    const DeniabilityReport den =
                        make_deniability_report(outcome.scores, model.priors());
                    fold_deltas[static_cast<std::size_t>(fold)].push_back(den.delta_star);
                    for (std::size_t k = 0; k < den.delta_per_step.size(); ++k) {
                        delta_step_sum[k] += den.delta_per_step[k];
                    }
                    epsilon_worst = std::max(epsilon_worst, den.epsilon);
                }
            }
            std::tie(cell.true_detect, cell.true_sem) = fold_stats(all_probes.rates());
            cell.fold_true = all_probes.rates();
            std::tie(cell.session_detect, cell.session_sem) = fold_stats(sessions.rates());
            for (const FoldCounter& counter : per_probe) {
                const auto [mean, sem] = fold_stats(counter.rates());
                cell.probe_true.push_back(mean);
                cell.probe_true_sem.push_back(sem);
            }
            double late = 0.0;
            int late_count = 0;
            for (int k = 2; k < probes; ++k) { // probes 3..K
                late += cell.probe_true[static_cast<std::size_t>(k)];
                ++late_count;
            }
            cell.true_detect_late = late_count > 0 ? late / late_count : cell.true_detect;
            if (report.deltas_enabled) {
                std::vector<double> fold_means;
                for (const std::vector<double>& deltas : fold_deltas) {
                    double sum = 0.0;
                    for (double d : deltas) sum += d;
                    fold_means.push_back(deltas.empty() ? 0.0
                                                        : sum / static_cast<double>(deltas.size()));
                }
                std::tie(cell.delta_star, cell.delta_star_sem) = fold_stats(fold_means);
                for (double sum : delta_step_sum) {
                    cell.delta_per_step.push_back(sum / config.sessions_per_cell);
                }
                cell.epsilon = epsilon_worst;
            }
            report.cells.push_back(std::move(cell));
        }
    }

    return CampaignArtifacts{std::move(report), std::move(model), stats};
}

DetectionReport run_campaign(const CampaignConfig& config) {
    return run_campaign_full(config).report;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0; // normalize negative zero
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string format_percent(double rate) {
    if (rate == 0.0) rate = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f%%", rate * 100.0);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += "\"\"";
        else quoted.push_back(c);
    }
    quoted += "\"";
    return quoted;
}

void csv_row(std::ostringstream& out, const std::string& cell_id, const std::string& defense,
             const std::string& noise, const std::string& click, const std::string& topic,
             const std::string& metric, const std::string& value, const std::string& sem) {
    out << csv_field(cell_id) << ',' << csv_field(defense) << ',' << csv_field(noise) << ','
        << csv_field(click) << ',' << csv_field(topic) << ',' << csv_field(metric) << ','
        << csv_field(value) << ',' << csv_field(sem) << '\n';
}

std::string render_report_csv(const DetectionReport& report) {
    std::ostringstream out;
    out << "cell_id,defense,noise,click,topic,metric,value,sem\n";
    for (const CellResult& cell : report.cells) {
        auto row = [&](const std::string& metric, const std::string& value,
                       const std::string& sem) {
            csv_row(out, cell.cell_id, cell.defense, cell.noise, cell.click, cell.topic_label,
                    metric, value, sem);
        };
        row("true_detect", format_value(cell.true_detect), format_value(cell.true_sem));
        row("true_detect_late", format_value(cell.true_detect_late), "");
        row("session_detect", format_value(cell.session_detect),
            format_value(cell.session_sem));
        for (std::size_t k = 0; k < cell.probe_true.size(); ++k) {
            row("probe_" + std::to_string(k + 1) + "_true", format_value(cell.probe_true[k]),
                format_value(cell.probe_true_sem[k]));
        }
        if (cell.deltas_enabled) {
            row("delta_star", format_value(cell.delta_star),
                format_value(cell.delta_star_sem));
            for (std::size_t k = 0; k < cell.delta_per_step.size(); ++k) {
                row("delta_step_" + std::to_string(k + 1),
                    format_value(cell.delta_per_step[k]), "");
            }
            row("epsilon", format_value(cell.epsilon), "");
        }
    }
    for (const ControlResult& control : report.controls) {
        auto row = [&](const std::string& metric, const std::string& value,
                       const std::string& sem) {
            csv_row(out, control.cell_id, control.defense, control.noise, control.click,
                    "other", metric, value, sem);
        };
        row("false_detect", format_value(control.false_detect),
            format_value(control.false_sem));
        row("session_false", format_value(control.session_false), "");
        for (std::size_t k = 0; k < control.probe_false.size(); ++k) {
            row("probe_" + std::to_string(k + 1) + "_false",
                format_value(control.probe_false[k]), "");
        }
        for (std::size_t t = 0; t < control.false_as_topic.size(); ++t) {
            const std::string label =
                t < report.labels.size() ? report.labels[t] : std::to_string(t);
            row("false_as:" + label, format_value(control.false_as_topic[t]), "");
        }
    }
    return out.str();
}

std::string pad(const std::string& s, std::size_t width) {
    std::string out = s;
    if (out.size() < width) out.append(width - out.size(), ' ');
    return out;
}

} // namespace

std::string render_text_report(const DetectionReport& report) {
    std::ostringstream out;
    out << "topic profile detection report\n";
    out << "==============================\n";
    out << "smoothing weight " << format_value(report.lambda) << " (prior deviation rmse "
        << format_value(report.lambda_rmse) << ")\n";
    out << "seed " << report.seed << ", " << report.sessions_per_cell << " sessions per cell, "
        << report.folds << " folds, " << report.probes_per_session << " probes per session\n";
    if (!report.deltas_enabled) {
        out << "deniability spreads omitted: topic priors deviate from uniform\n";
    }

    // cells are ordered grid-by-grid; group on the cell_id prefix
    std::size_t cell_index = 0;
    std::size_t control_index = 0;
    while (cell_index < report.cells.size() || control_index < report.controls.size()) {
        std::string group;
        if (cell_index < report.cells.size()) {
            const CellResult& cell = report.cells[cell_index];
            group = cell.defense + "/" + cell.noise + "/" + cell.click;
        } else {
            const ControlResult& control = report.controls[control_index];
            group = control.defense + "/" + control.noise + "/" + control.click;
        }
        out << "\n[" << group << "]\n";
        out << "  " << pad("topic", 26) << pad("true", 9) << pad("late(3+)", 10)
            << pad("session", 9);
        if (report.deltas_enabled) out << pad("delta*", 9) << pad("epsilon", 9);
        out << "\n";
        double sum_true = 0.0, sum_late = 0.0;
        int group_cells = 0;
        while (cell_index < report.cells.size()) {
            const CellResult& cell = report.cells[cell_index];
            if (cell.defense + "/" + cell.noise + "/" + cell.click != group) break;
            out << "  " << pad(cell.topic_label, 26) << pad(format_percent(cell.true_detect), 9)
                << pad(format_percent(cell.true_detect_late), 10)
                << pad(format_percent(cell.session_detect), 9);
            if (report.deltas_enabled) {
                char dbuf[32];
                std::snprintf(dbuf, sizeof dbuf, "%.3f", cell.delta_star);
                out << pad(dbuf, 9);
                if (std::isinf(cell.epsilon)) {
                    out << pad("inf", 9);
                } else {
                    char ebuf[32];
                    std::snprintf(ebuf, sizeof ebuf, "%.3f", cell.epsilon);
                    out << pad(ebuf, 9);
                }
            }
            out << "\n";
            sum_true += cell.true_detect;
            sum_late += cell.true_detect_late;
            ++group_cells;
            ++cell_index;
        }
        if (group_cells > 0) {
            out << "  " << pad("average", 26)
                << pad(format_percent(sum_true / group_cells), 9)
                << pad(format_percent(sum_late / group_cells), 10) << "\n";
        }
        if (control_index < report.controls.size()) {
            const ControlResult& control = report.controls[control_index];
            if (control.defense + "/" + control.noise + "/" + control.click == group) {
                out << "  control false-detect " << format_percent(control.false_detect)
                    << " (session " << format_percent(control.session_false) << ")\n";
                ++control_index;
            }
        }
    }
    return out.str();
}

void write_report(const DetectionReport& report, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
    write_text_file((fs::path(dir) / "report.csv").string(), render_report_csv(report));
    save_report_json(report, (fs::path(dir) / "report.json").string());
    write_text_file((fs::path(dir) / "report.txt").string(), render_text_report(report));
}

std::vector<CsvRow> parse_report_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(fields));
            fields.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!field.empty() || !fields.empty()) {
        fields.push_back(std::move(field));
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw ParseError("empty report CSV", 1);
    const std::vector<std::string> header = {"cell_id", "defense", "noise",  "click",
                                             "topic",   "metric",  "value", "sem"};
    if (rows.front() != header) throw ParseError("unexpected report CSV header", 1);
    std::vector<CsvRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() == 1 && rows[r][0].empty()) continue; // stray blank line
        if (rows[r].size() != header.size()) {
            throw ParseError("report CSV row has wrong field count", static_cast<int>(r + 1));
        }
        out.push_back(CsvRow{rows[r][0], rows[r][1], rows[r][2], rows[r][3], rows[r][4],
                             rows[r][5], rows[r][6], rows[r][7]});
    }
    return out;
}

} // namespace pridetect
