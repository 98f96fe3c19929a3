#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pridetect/estimator.hpp"

namespace pridetect {

// How much a single observation moved one topic's probability: the ratio of
// posterior to prior. 1 means the observation was uninformative for that
// topic; the prior must be strictly positive, the posterior may be zero.
double indistinguishability_ratio(double posterior, double prior);

// Spread of a page's score vector: the gap between the largest and smallest
// component, divided by the number of topics. 0 means every topic moved
// identically — the page reveals nothing about which topic is the target.
double delta_k(const PriScoreVector& scores);

// Worst-case spread over a session's probe pages.
double delta_star(const std::vector<PriScoreVector>& session_scores);

// Worst-case multiplicative evidence over a session: max |ln score| over all
// components of all pages. A zero component means unbounded evidence and
// yields +infinity.
double epsilon_bound(const std::vector<PriScoreVector>& session_scores);

// One failed consistency proposition: its name and by how much it failed.
struct PropositionViolation {
    std::string name;
    double margin;
};

// Validate the algebra that links movement ratios, priors and posteriors:
//  - ordering chain: min(post)/max(prior) <= min(M) <= mean(M) <= max(M)
//                    <= max(post)/min(prior)
//  - mass bounds:    1/max(prior) <= sum(M) <= 1/min(prior)
//  - deniability:    every posterior lies within max-pairwise-gap of uniform
// `scores` plays the role of the movement ratios M_i. Priors must be strictly
// positive and the posterior normalized.
std::vector<PropositionViolation> check_propositions(const PriScoreVector& scores,
                                                     const Eigen::VectorXd& priors,
                                                     const Eigen::VectorXd& posterior);

// Session deniability summary, computed against a model whose priors must be
// effectively uniform (RMSE from uniform at most kUniformPriorRmseLimit) —
// with skewed priors the spread statistic stops measuring deniability and the
// report refuses to pretend otherwise.
struct DeniabilityReport {
    std::vector<double> delta_per_step; // one spread value per probe page
    double delta_star = 0.0;
    double epsilon = 0.0; // +infinity when any component is zero
};

inline constexpr double kUniformPriorRmseLimit = 0.01;
inline constexpr double kPropositionTolerance = 1e-9;

DeniabilityReport make_deniability_report(const std::vector<PriScoreVector>& session_scores,
                                          const Eigen::VectorXd& model_priors);

} // namespace pridetect
