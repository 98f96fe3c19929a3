#include "pridetect/deniability.hpp"

#include <cmath>
#include <limits>

namespace pridetect {

double indistinguishability_ratio(double posterior, double prior) {
    if (!(prior > 0.0)) throw ArgumentError("indistinguishability ratio needs a positive prior");
    if (!(posterior >= 0.0)) throw ArgumentError("posterior probability cannot be negative");
    return posterior / prior;
}

double delta_k(const PriScoreVector& scores) {
    if (scores.size() == 0) throw ArgumentError("delta: empty score vector");
    return (scores.maxCoeff() - scores.minCoeff()) / static_cast<double>(scores.size());
}

double delta_star(const std::vector<PriScoreVector>& session_scores) {
    if (session_scores.empty()) throw ArgumentError("delta*: no probe scores");
    double worst = 0.0;
    for (const PriScoreVector& scores : session_scores) {
        worst = std::max(worst, delta_k(scores));
    }
    return worst;
}

double epsilon_bound(const std::vector<PriScoreVector>& session_scores) {
    if (session_scores.empty()) throw ArgumentError("epsilon: no probe scores");
    double worst = 0.0;
    for (const PriScoreVector& scores : session_scores) {
        for (Eigen::Index i = 0; i < scores.size(); ++i) {
            const double m = scores[i];
            if (!(m >= 0.0)) throw ArgumentError("epsilon: negative score component");
            if (m == 0.0) return std::numeric_limits<double>::infinity();
            worst = std::max(worst, std::abs(std::log(m)));
        }
    }
    return worst;
}

std::vector<PropositionViolation> check_propositions(const PriScoreVector& scores,
                                                     const Eigen::VectorXd& priors,
                                                     const Eigen::VectorXd& posterior) {
    const Eigen::Index n = scores.size();
    if (n == 0 || priors.size() != n || posterior.size() != n) {
        throw ArgumentError("check_propositions: dimension mismatch");
    }
    if (priors.minCoeff() <= 0.0) {
        throw ArgumentError("check_propositions: priors must be strictly positive");
    }
    if (std::abs(posterior.sum() - 1.0) > 1e-6 || posterior.minCoeff() < 0.0) {
        throw ArgumentError("check_propositions: posterior must be a distribution");
    }

    const double tol = kPropositionTolerance;
    std::vector<PropositionViolation> violations;
    auto require = [&](bool ok, const char* name, double margin) {
        if (!ok) violations.push_back(PropositionViolation{name, margin});
    };

    const double m_min = scores.minCoeff();
    const double m_max = scores.maxCoeff();
    const double m_mean = scores.mean();
    const double p_min = priors.minCoeff();
    const double p_max = priors.maxCoeff();
    const double post_min = posterior.minCoeff();
    const double post_max = posterior.maxCoeff();

    const double chain_low = post_min / p_max;
    const double chain_high = post_max / p_min;
    require(chain_low <= m_min + tol, "chain:lower", chain_low - m_min);
    require(m_min <= m_mean + tol, "chain:min-mean", m_min - m_mean);
    require(m_mean <= m_max + tol, "chain:mean-max", m_mean - m_max);
    require(m_max <= chain_high + tol, "chain:upper", m_max - chain_high);

    const double m_sum = scores.sum();
    require(1.0 / p_max <= m_sum + tol, "sum:lower", 1.0 / p_max - m_sum);
    require(m_sum <= 1.0 / p_min + tol, "sum:upper", m_sum - 1.0 / p_min);

    // Mutual plausible deniability: with a max pairwise posterior gap of
    // delta, every topic's posterior stays within delta of uniform.
    const double gap = post_max - post_min;
    const double uniform = 1.0 / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double dev = std::abs(posterior[i] - uniform);
        require(dev <= gap + 1e-12, "deniability:band", dev - gap);
    }
    return violations;
}

DeniabilityReport make_deniability_report(const std::vector<PriScoreVector>& session_scores,
                                          const Eigen::VectorXd& model_priors) {
    if (model_priors.size() == 0) throw ArgumentError("deniability report: empty priors");
    const double uniform = 1.0 / static_cast<double>(model_priors.size());
    const double rmse =
        std::sqrt((model_priors.array() - uniform).square().sum() / model_priors.size());
    if (rmse > kUniformPriorRmseLimit) {
        throw ArgumentError(
            "deniability report refused: topic priors deviate from uniform (rmse " +
            std::to_string(rmse) + " > " + std::to_string(kUniformPriorRmseLimit) +
            "); the spread statistic is only meaningful under uniform priors");
    }
    DeniabilityReport report;
    report.delta_per_step.reserve(session_scores.size());
    for (const PriScoreVector& scores : session_scores) {
        report.delta_per_step.push_back(delta_k(scores));
    }
    report.delta_star = delta_star(session_scores);
    report.epsilon = epsilon_bound(session_scores);
    return report;
}

} // namespace pridetect
