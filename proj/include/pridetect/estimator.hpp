#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pridetect/corpus.hpp"

namespace pridetect {

// A single search-result item: advert or organic result.
struct ResultItem {
    std::string title;
    std::string snippet;
    std::string url;

    std::string text() const { return title + " " + snippet; }
};

// One search-engine response. Adverts are the only part the estimator reads;
// organic results exist for click behaviour. step_index is the 1-based
// position of the response within its session; is_probe marks responses to
// probe queries (those pages are measured, never clicked).
struct ResponsePage {
    std::string query;
    std::vector<ResultItem> organic;
    std::vector<ResultItem> adverts;
    int step_index = 1;
    bool is_probe = false;
};

// Concatenated advert text of a page (titles and snippets, page order).
std::string advert_text(const ResponsePage& page);

// One score per topic, same order as the model's labels. Non-negative and
// finite; a page with no usable advert evidence scores 1 everywhere.
using PriScoreVector = Eigen::VectorXd;

// Interest score for one topic: how much more probable the page's advert
// words are under the topic's keyword profile than under the whole corpus,
// weighted by the words' share of the page. Unsmoothed; pages without
// dictionary tokens score 1 (no evidence either way).
double pri_score(const ResponsePage& page, const TopicModel& model, int topic_id);

// Smoothed per-topic profile of a page. Pages whose adverts contain no
// dictionary tokens (or no adverts at all) yield the all-ones vector.
PriScoreVector pri_plus_score(const ResponsePage& page, const TopicModel& model);

// Per-topic score distributions learned from labelled training pages: for
// each true topic i, the mean and (sample) standard deviation of every score
// component over the pages labelled i. Standard deviations are floored so
// degenerate components stay usable.
struct TopicStats {
    Eigen::MatrixXd mean;   // row i: mean score vector of pages labelled i
    Eigen::MatrixXd stddev; // row i: per-component sample stddev, floored

    int topic_count() const { return static_cast<int>(mean.rows()); }
};

inline constexpr double kSigmaFloor = 1e-6;
inline constexpr double kDetectTieTolerance = 1e-12;

// Fit stats from labelled pages (scored through the model). Every topic in
// the model needs at least two pages.
TopicStats fit_topic_stats(const std::vector<std::pair<int, ResponsePage>>& labelled_pages,
                           const TopicModel& model);

// Same, from pre-computed score vectors (the harness scores pages once).
TopicStats fit_topic_stats_from_scores(
    const std::vector<std::pair<int, PriScoreVector>>& labelled_scores, int topic_count);

// Distance profile of a score vector: Z_i sums, over all components j, the
// squared deviation of P_j from topic i's training mean in units of topic i's
// training spread. Z_i == 0 exactly when P equals topic i's mean vector.
using NormalizedScore = Eigen::VectorXd;

NormalizedScore normalize(const PriScoreVector& scores, const TopicStats& stats);

// The detected topic: the index with the smallest distance. Any tie within
// kDetectTieTolerance is treated as inconclusive and yields 0 (background).
int detect(const NormalizedScore& z);

// Session-level call: was the target topic detected at any probe?
bool detect_session(const std::vector<int>& probe_detections, int target_topic);

} // namespace pridetect
