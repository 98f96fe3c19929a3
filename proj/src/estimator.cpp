#include "pridetect/estimator.hpp"

#include <algorithm>
#include <cmath>

namespace pridetect {

std::string advert_text(const ResponsePage& page) {
    std::string text;
    for (const ResultItem& ad : page.adverts) {
        if (!text.empty()) text.push_back(' ');
        text += ad.text();
    }
    return text;
}

namespace {

// Raw dictionary-token counts of a page's advert text.
CountMap page_counts(const ResponsePage& page, const TopicModel& model) {
    const TokenSequence tokens = tokenize(advert_text(page));
    CountMap counts;
    for (const std::string& tok : tokens) {
        if (model.dictionary().contains(tok)) ++counts[tok];
    }
    return counts;
}

} // namespace

double pri_score(const ResponsePage& page, const TopicModel& model, int topic_id) {
    if (topic_id < 0 || topic_id >= model.topic_count()) {
        throw ArgumentError("pri_score: topic index out of range");
    }
    const CountMap counts = page_counts(page, model);
    double total = 0.0;
    for (const auto& [word, count] : counts) total += static_cast<double>(count);
    if (total == 0.0) return 1.0; // no evidence either way

    // Unsmoothed ratio of per-topic to whole-corpus relative frequency,
    // weighted by the word's share of the page's dictionary tokens.
    const double topic_total = model.topic_totals()[topic_id];
    const double corpus_total = model.topic_totals().sum();
    double score = 0.0;
    for (const auto& [word, count] : counts) {
        const int w = model.dictionary().index_of(word);
        const double n_topic = model.counts()(topic_id, w);
        const double n_corpus = model.counts().col(w).sum();
        if (n_corpus == 0.0) continue; // never happens for dictionary words
        const double ratio = (n_topic / topic_total) / (n_corpus / corpus_total);
        score += ratio * (static_cast<double>(count) / total);
    }
    return score;
}

PriScoreVector pri_plus_score(const ResponsePage& page, const TopicModel& model) {
    const int topics = model.topic_count();
    const CountMap counts = page_counts(page, model);
    if (counts.empty()) return PriScoreVector::Ones(topics);

    // Smoothed relative frequencies of the page's advert words over the
    // dictionary, as a dense column; the model's frequency-ratio matrix maps
    // it to one score per topic.
    const int words = model.dictionary().size();
    double raw_total = 0.0;
    for (const auto& [word, count] : counts) raw_total += static_cast<double>(count);
    const double lambda = model.lambda();
    const double denom = lambda * words + (1.0 - lambda) * raw_total;

    Eigen::VectorXd psi = Eigen::VectorXd::Constant(words, lambda / denom);
    for (const auto& [word, count] : counts) {
        const int w = model.dictionary().index_of(word);
        psi[w] = smoothed_count(lambda, static_cast<double>(count)) / denom;
    }
    return model.freq_ratios() * psi;
}

TopicStats fit_topic_stats_from_scores(
    const std::vector<std::pair<int, PriScoreVector>>& labelled_scores, int topic_count) {
    if (topic_count <= 0) throw ArgumentError("fit_topic_stats: no topics");
    std::vector<std::vector<const PriScoreVector*>> grouped(
        static_cast<std::size_t>(topic_count));
    for (const auto& [topic, scores] : labelled_scores) {
        if (topic < 0 || topic >= topic_count) {
            throw ArgumentError("fit_topic_stats: topic label out of range");
        }
        if (scores.size() != topic_count) {
            throw ContractViolation("fit_topic_stats: score vector has wrong dimension");
        }
        grouped[static_cast<std::size_t>(topic)].push_back(&scores);
    }

    TopicStats stats;
    stats.mean = Eigen::MatrixXd::Zero(topic_count, topic_count);
    stats.stddev = Eigen::MatrixXd::Zero(topic_count, topic_count);
    for (int i = 0; i < topic_count; ++i) {
        const auto& group = grouped[static_cast<std::size_t>(i)];
        const std::size_t n = group.size();
        if (n < 2) {
            throw ConfigError("fit_topic_stats: need at least two labelled pages per topic");
        }
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(topic_count);
        for (const PriScoreVector* v : group) mean += *v;
        mean /= static_cast<double>(n);
        Eigen::VectorXd var = Eigen::VectorXd::Zero(topic_count);
        for (const PriScoreVector* v : group) var += (*v - mean).array().square().matrix();
        var /= static_cast<double>(n - 1); // sample variance
        stats.mean.row(i) = mean.transpose();
        stats.stddev.row(i) = var.array().sqrt().max(kSigmaFloor).transpose();
    }
    return stats;
}

TopicStats fit_topic_stats(const std::vector<std::pair<int, ResponsePage>>& labelled_pages,
                           const TopicModel& model) {
    std::vector<std::pair<int, PriScoreVector>> scored;
    scored.reserve(labelled_pages.size());
    for (const auto& [topic, page] : labelled_pages) {
        scored.emplace_back(topic, pri_plus_score(page, model));
    }
    return fit_topic_stats_from_scores(scored, model.topic_count());
}

NormalizedScore normalize(const PriScoreVector& scores, const TopicStats& stats) {
    const int topics = stats.topic_count();
    if (scores.size() != topics || stats.mean.cols() != topics) {
        throw ContractViolation("normalize: shape mismatch between scores and stats");
    }
    NormalizedScore z(topics);
    for (int i = 0; i < topics; ++i) {
        const Eigen::ArrayXd dev = (scores.transpose() - stats.mean.row(i)).array() /
                                   stats.stddev.row(i).array();
        z[i] = dev.square().sum();
    }
    return z;
}

int detect(const NormalizedScore& z) {
    if (z.size() == 0) throw ArgumentError("detect: empty score vector");
    int best = 0;
    for (int i = 1; i < z.size(); ++i) {
        if (z[i] < z[best]) best = i;
    }
    // Any other component within tolerance of the minimum makes the result
    // inconclusive: fall back to the background topic.
    for (int i = 0; i < z.size(); ++i) {
        if (i != best && std::abs(z[i] - z[best]) <= kDetectTieTolerance) return 0;
    }
    return best;
}

bool detect_session(const std::vector<int>& probe_detections, int target_topic) {
    return std::find(probe_detections.begin(), probe_detections.end(), target_topic) !=
           probe_detections.end();
}

} // namespace pridetect
