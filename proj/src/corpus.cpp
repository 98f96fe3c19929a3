#include "pridetect/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pridetect/strutil.hpp"

namespace pridetect {

namespace {

constexpr const char* kBackgroundLabel = "other";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void add_keywords(TopicRecord& topic, std::string_view value) {
    for (std::string& term : split_ws(value)) {
        topic.keywords.push_back(to_lower_ascii(std::move(term)));
    }
}

void finalize_stems(TopicRecord& topic) {
    std::vector<std::string> stems;
    for (const std::string& kw : topic.keywords) {
        for (std::string& tok : tokenize(kw)) stems.push_back(std::move(tok));
    }
    std::sort(stems.begin(), stems.end());
    stems.erase(std::unique(stems.begin(), stems.end()), stems.end());
    topic.keyword_stems = std::move(stems);
}

} // namespace

int TopicCatalog::index_of(const std::string& label) const {
    for (int i = 0; i < size(); ++i) {
        if (topics[static_cast<std::size_t>(i)].label == label) return i;
    }
    return -1;
}

void TopicCatalog::validate() const {
    if (topics.size() < 2) {
        throw ConfigError("topic catalog needs the background topic plus at least one more");
    }
    if (topics.front().label != kBackgroundLabel) {
        throw ConfigError("topic catalog must place the background topic 'other' first");
    }
    for (std::size_t i = 0; i < topics.size(); ++i) {
        for (std::size_t j = i + 1; j < topics.size(); ++j) {
            if (topics[i].label == topics[j].label) {
                throw ConfigError("duplicate topic label: " + topics[i].label);
            }
        }
    }
    for (std::size_t i = 1; i < topics.size(); ++i) {
        if (topics[i].keyword_stems.empty()) {
            throw ConfigError("topic '" + topics[i].label + "' has no usable keywords");
        }
    }
}

std::vector<TopicRecord> parse_topic_sections(std::string_view text) {
    std::vector<TopicRecord> records;
    enum class Key { None, Keywords, Queries };
    Key current = Key::None;

    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#' || stripped.front() == ';') continue;

        if (stripped.front() == '[') {
            if (stripped.back() != ']') throw ParseError("unterminated section header", lineno);
            std::string label = trim_copy(stripped.substr(1, stripped.size() - 2));
            if (label.empty()) throw ParseError("empty section name", lineno);
            records.push_back(TopicRecord{label, {}, {}, {}});
            current = Key::None;
            continue;
        }
        if (records.empty()) throw ParseError("content before any [section] header", lineno);
        TopicRecord& topic = records.back();

        // A new "key =" line only counts when the key is one we know;
        // anything else is a continuation of the previous key (queries may
        // legitimately contain '=').
        const std::size_t eq = stripped.find('=');
        std::string key = eq == std::string_view::npos
                              ? std::string()
                              : to_lower_ascii(trim_copy(stripped.substr(0, eq)));
        if (key == "keywords" || key == "queries") {
            current = key == "keywords" ? Key::Keywords : Key::Queries;
            std::string_view value = trim(stripped.substr(eq + 1));
            if (!value.empty()) {
                if (current == Key::Keywords) {
                    add_keywords(topic, value);
                } else {
                    topic.queries.emplace_back(value);
                }
            }
            continue;
        }
        switch (current) {
        case Key::Keywords:
            add_keywords(topic, stripped);
            break;
        case Key::Queries:
            topic.queries.emplace_back(stripped);
            break;
        case Key::None:
            throw ParseError("expected 'keywords =' or 'queries =' line", lineno);
        }
    }
    for (TopicRecord& topic : records) finalize_stems(topic);
    return records;
}

std::vector<TopicRecord> load_topic_sections(const std::string& path) {
    return parse_topic_sections(read_file(path));
}

TopicCatalog catalog_from_records(std::vector<TopicRecord> records) {
    auto it = std::find_if(records.begin(), records.end(),
                           [](const TopicRecord& t) { return t.label == kBackgroundLabel; });
    if (it == records.end()) {
        throw ConfigError("topic catalog is missing the background topic 'other'");
    }
    std::rotate(records.begin(), it, it + 1);
    TopicCatalog catalog{std::move(records)};
    catalog.validate();
    return catalog;
}

TopicCatalog load_catalog(const std::string& path) {
    return catalog_from_records(load_topic_sections(path));
}

TrainingCorpus load_corpus_tsv(const std::string& path, const TopicCatalog& catalog) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);
    TrainingCorpus corpus;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError("corpus line is missing the tab separator", lineno);
        }
        std::string label = trim_copy(std::string_view(line).substr(0, tab));
        std::string text = trim_copy(std::string_view(line).substr(tab + 1));
        const int topic = catalog.index_of(label);
        if (topic < 0) throw ParseError("unknown topic label '" + label + "'", lineno);
        corpus.entries.emplace_back(topic, std::move(text));
    }
    return corpus;
}

int Dictionary::index_of(const std::string& w) const {
    auto it = position.find(w);
    return it == position.end() ? -1 : it->second;
}

Dictionary build_dictionary(const TrainingCorpus& corpus, const std::set<std::string>& stopwords) {
    std::set<std::string> unique;
    for (const auto& [topic, text] : corpus.entries) {
        for (std::string& tok : tokenize(text, stopwords)) unique.insert(std::move(tok));
    }
    if (unique.empty()) throw ConfigError("training corpus yields an empty dictionary");
    Dictionary dict;
    dict.words.assign(unique.begin(), unique.end());
    for (int i = 0; i < dict.size(); ++i) {
        dict.position.emplace(dict.words[static_cast<std::size_t>(i)], i);
        dict.word_set.insert(dict.words[static_cast<std::size_t>(i)]);
    }
    return dict;
}

double smoothed_count(double lambda, double raw) {
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw ArgumentError("smoothing weight must lie in [0, 1)");
    }
    if (!(raw >= 0.0)) throw ArgumentError("raw count must be non-negative");
    return lambda + (1.0 - lambda) * raw;
}

TopicModel::TopicModel(std::vector<std::string> labels, Dictionary dict, double lambda,
                       Eigen::MatrixXd counts)
    : labels_(std::move(labels)), dict_(std::move(dict)), lambda_(lambda),
      counts_(std::move(counts)) {
    if (!(lambda_ >= 0.0 && lambda_ < 1.0)) {
        throw ArgumentError("smoothing weight must lie in [0, 1)");
    }
    const int topics = topic_count();
    const int words = dict_.size();
    if (counts_.rows() != topics || counts_.cols() != words) {
        throw ContractViolation("count matrix shape does not match labels/dictionary");
    }
    topic_totals_ = counts_.rowwise().sum();
    corpus_counts_ = counts_.colwise().sum().transpose();
    corpus_total_ = topic_totals_.sum();
    if (lambda_ == 0.0) {
        for (int i = 0; i < topics; ++i) {
            if (topic_totals_[i] <= 0.0) {
                throw ConfigError("topic '" + labels_[static_cast<std::size_t>(i)] +
                                  "' has no dictionary tokens; use a positive smoothing weight");
            }
        }
    }

    // Priors: each topic's smoothed mass over the summed smoothed masses.
    Eigen::VectorXd smoothed_mass(topics);
    for (int i = 0; i < topics; ++i) {
        smoothed_mass[i] = lambda_ * words + (1.0 - lambda_) * topic_totals_[i];
    }
    priors_ = smoothed_mass / smoothed_mass.sum();

    // Frequency ratios, the estimator kernel.
    ratios_.resize(topics, words);
    const double corpus_denom = lambda_ * words + (1.0 - lambda_) * corpus_total_;
    for (int w = 0; w < words; ++w) {
        const double cf = smoothed_count(lambda_, corpus_counts_[w]) / corpus_denom;
        for (int i = 0; i < topics; ++i) {
            const double tf = smoothed_count(lambda_, counts_(i, w)) / smoothed_mass[i];
            ratios_(i, w) = tf / cf;
        }
    }
}

double TopicModel::topic_freq(int topic, int word) const {
    const double denom = lambda_ * dict_.size() + (1.0 - lambda_) * topic_totals_[topic];
    return smoothed_count(lambda_, counts_(topic, word)) / denom;
}

double TopicModel::corpus_freq(int word) const {
    const double denom = lambda_ * dict_.size() + (1.0 - lambda_) * corpus_total_;
    return smoothed_count(lambda_, corpus_counts_[word]) / denom;
}

double TopicModel::prior_rmse_uniform() const {
    const double uniform = 1.0 / topic_count();
    return std::sqrt((priors_.array() - uniform).square().sum() / topic_count());
}

FrequencyMap TopicModel::per_topic_freq(int topic) const {
    FrequencyMap out;
    for (int w = 0; w < dict_.size(); ++w) {
        out[dict_.words[static_cast<std::size_t>(w)]] = topic_freq(topic, w);
    }
    return out;
}

FrequencyMap TopicModel::global_freq() const {
    FrequencyMap out;
    for (int w = 0; w < dict_.size(); ++w) {
        out[dict_.words[static_cast<std::size_t>(w)]] = corpus_freq(w);
    }
    return out;
}

namespace {

Eigen::MatrixXd count_matrix(const TrainingCorpus& corpus, const TopicCatalog& catalog,
                             const Dictionary& dict, const std::set<std::string>& stopwords) {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(catalog.size(), dict.size());
    std::vector<bool> seen(static_cast<std::size_t>(catalog.size()), false);
    for (const auto& [topic, text] : corpus.entries) {
        if (topic < 0 || topic >= catalog.size()) {
            throw ConfigError("corpus entry references an out-of-range topic index");
        }
        seen[static_cast<std::size_t>(topic)] = true;
        for (const std::string& tok : tokenize(text, stopwords)) {
            const int w = dict.index_of(tok);
            if (w >= 0) counts(topic, w) += 1.0;
        }
    }
    for (int i = 0; i < catalog.size(); ++i) {
        if (!seen[static_cast<std::size_t>(i)]) {
            throw ConfigError("topic '" + catalog[i].label + "' has no training corpus entries");
        }
    }
    return counts;
}

} // namespace

TopicModel fit_topic_model(const TrainingCorpus& corpus, const TopicCatalog& catalog,
                           double lambda, const std::set<std::string>& stopwords) {
    catalog.validate();
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw ArgumentError("smoothing weight must lie in [0, 1)");
    }
    Dictionary dict = build_dictionary(corpus, stopwords);
    Eigen::MatrixXd counts = count_matrix(corpus, catalog, dict, stopwords);
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(catalog.size()));
    for (const TopicRecord& t : catalog.topics) labels.push_back(t.label);
    return TopicModel(std::move(labels), std::move(dict), lambda, std::move(counts));
}

LambdaFit fit_lambda(const TrainingCorpus& corpus, const TopicCatalog& catalog,
                     const std::set<std::string>& stopwords) {
    catalog.validate();
    Dictionary dict = build_dictionary(corpus, stopwords);
    const Eigen::MatrixXd counts = count_matrix(corpus, catalog, dict, stopwords);
    const Eigen::VectorXd totals = counts.rowwise().sum();
    const int topics = catalog.size();
    const int words = dict.size();
    const double uniform = 1.0 / topics;

    const auto loss_at = [&](double lambda) {
        Eigen::VectorXd mass(topics);
        for (int i = 0; i < topics; ++i) {
            mass[i] = lambda * words + (1.0 - lambda) * totals[i];
        }
        const Eigen::VectorXd priors = mass / mass.sum();
        return (priors.array() - uniform).square().sum();
    };

    const int grid_points = static_cast<int>(std::lround(kLambdaGridMax / kLambdaGridStep)) + 1;
    double best_lambda = 0.0;
    double best_loss = loss_at(0.0);
    for (int k = 1; k < grid_points; ++k) {
        const double lambda = k * kLambdaGridStep;
        const double loss = loss_at(lambda);
        if (loss < best_loss - 1e-15) { // exact ties keep the smaller weight
            best_loss = loss;
            best_lambda = lambda;
        }
    }
    return LambdaFit{best_lambda, std::sqrt(best_loss / topics)};
}

} // namespace pridetect
