#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pridetect/errors.hpp"
#include "pridetect/text.hpp"

namespace pridetect {

// One topic section: a label, its keyword terms (raw and stemmed), and a pool
// of example queries. Topic files use an INI-like layout:
//
//   [gambling addiction]
//   keywords = gambling addiction compulsive
//               dependency counselling
//   queries = am i addicted to gambling
//       gambling addiction stories
//
// Continuation lines (leading whitespace, no '=') extend the previous key;
// every line under "queries" is one verbatim query.
struct TopicRecord {
    std::string label;
    std::vector<std::string> keywords;      // raw terms, file order
    std::vector<std::string> keyword_stems; // stemmed, deduplicated, sorted
    std::vector<std::string> queries;       // verbatim query strings
};

// The topic catalog c_0..c_N. c_0 is always the background topic "other"
// (empty keyword list); the remaining N topics are the sensitive ones.
struct TopicCatalog {
    std::vector<TopicRecord> topics;

    int size() const { return static_cast<int>(topics.size()); } // N + 1
    int sensitive_count() const { return size() - 1; }           // N
    int index_of(const std::string& label) const;                // -1 if absent
    const TopicRecord& operator[](int i) const { return topics.at(static_cast<std::size_t>(i)); }

    // Unique labels, "other" present (moved to index 0), at least one
    // sensitive topic, every sensitive topic has at least one keyword.
    void validate() const;
};

// Parse topic sections from INI-like text / file (format above).
std::vector<TopicRecord> parse_topic_sections(std::string_view text);
std::vector<TopicRecord> load_topic_sections(const std::string& path);

// Load a catalog file; reorders "other" to index 0 and validates.
TopicCatalog load_catalog(const std::string& path);
TopicCatalog catalog_from_records(std::vector<TopicRecord> records);

// Training corpus: labelled advert texts, one (topic, text) pair per entry.
struct TrainingCorpus {
    std::vector<std::pair<int, std::string>> entries;
};

// TSV loader: one entry per line, "topic label<TAB>advert text". Blank lines
// and lines starting with '#' are skipped. Unknown labels and tab-less lines
// are errors (with line numbers).
TrainingCorpus load_corpus_tsv(const std::string& path, const TopicCatalog& catalog);

// The estimator dictionary: sorted unique tokens over the whole corpus.
struct Dictionary {
    std::vector<std::string> words;                 // sorted, unique
    std::unordered_map<std::string, int> position;  // word -> index in words
    std::unordered_set<std::string> word_set;

    int size() const { return static_cast<int>(words.size()); }
    bool contains(const std::string& w) const { return word_set.count(w) != 0; }
    int index_of(const std::string& w) const;       // -1 if absent
};

Dictionary build_dictionary(const TrainingCorpus& corpus,
                            const std::set<std::string>& stopwords = default_stopwords());

// Additive smoothing of a single count: lambda + (1 - lambda) * raw.
// lambda must lie in [0, 1); raw must be non-negative.
double smoothed_count(double lambda, double raw);

struct LambdaFit {
    double lambda;
    double rmse; // root-mean-squared deviation of the smoothed priors from uniform
};

// Per-topic keyword statistics with smoothing baked in. Rows are topics
// (0..N), columns are dictionary words.
class TopicModel {
public:
    TopicModel() = default;
    TopicModel(std::vector<std::string> labels, Dictionary dict, double lambda,
               Eigen::MatrixXd counts);

    int topic_count() const { return static_cast<int>(labels_.size()); } // N + 1
    const std::vector<std::string>& labels() const { return labels_; }
    const Dictionary& dictionary() const { return dict_; }
    double lambda() const { return lambda_; }
    const Eigen::MatrixXd& counts() const { return counts_; }
    const Eigen::VectorXd& topic_totals() const { return topic_totals_; }

    // Smoothed relative frequency of word w within topic i's keyword sequence.
    double topic_freq(int topic, int word) const;
    // Smoothed relative frequency of word w within the concatenated corpus.
    double corpus_freq(int word) const;
    // Precomputed topic_freq / corpus_freq ratios (the estimator's kernel).
    const Eigen::MatrixXd& freq_ratios() const { return ratios_; }

    // Smoothed topic priors. Each topic's smoothed keyword mass is normalized
    // by the sum of all topics' smoothed masses, so the priors always form a
    // probability distribution, for any smoothing weight.
    const Eigen::VectorXd& priors() const { return priors_; }

    // Root-mean-squared deviation of the priors from the uniform distribution.
    double prior_rmse_uniform() const;

    // Map views (token -> value) for inspection and tests.
    FrequencyMap per_topic_freq(int topic) const;
    FrequencyMap global_freq() const;

private:
    std::vector<std::string> labels_;
    Dictionary dict_;
    double lambda_ = 0.0;
    Eigen::MatrixXd counts_;       // (N+1) x |D| raw counts
    Eigen::VectorXd topic_totals_; // raw per-topic totals t_i
    Eigen::VectorXd corpus_counts_; // raw per-word totals over all topics
    double corpus_total_ = 0.0;
    Eigen::VectorXd priors_;
    Eigen::MatrixXd ratios_;
};

// Fit the model at a fixed smoothing weight. Every topic must contribute at
// least one corpus entry; the dictionary must be non-empty.
TopicModel fit_topic_model(const TrainingCorpus& corpus, const TopicCatalog& catalog,
                           double lambda,
                           const std::set<std::string>& stopwords = default_stopwords());

// Choose the smoothing weight on the grid {0, 0.0005, ..., 0.2} minimizing
// the squared deviation of the priors from uniform; exact ties resolve to the
// smaller weight.
LambdaFit fit_lambda(const TrainingCorpus& corpus, const TopicCatalog& catalog,
                     const std::set<std::string>& stopwords = default_stopwords());

inline constexpr double kLambdaGridStep = 0.0005;
inline constexpr double kLambdaGridMax = 0.2;

} // namespace pridetect
