#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xad/numerics.hpp"
#include "xad/shapley.hpp"

namespace xad {

struct ClassificationReport {
    double acc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> auc;  // absent for single-class labels
    double uar = 0.0;           // percent, to match the usual reporting scale
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Thresholds at tau with the strict rule score > tau.
ClassificationReport classify_metrics(const std::vector<double>& scores,
                                      const std::vector<int>& labels, double tau);

std::optional<double> roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

using DecisionFn = std::function<int(const Vector&)>;
using ProbFn = std::function<double(const Vector&)>;  // P(anomalous | x)

struct CurvePoint {
    double kappa = 0.0;  // percent of features ablated/retained
    double accuracy = 0.0;
    double log_odds = 0.0;
};

struct CurveReport {
    std::vector<CurvePoint> points;
    double accuracy_auc = 0.0;  // trapezoid over kappa in [0,1]
    double log_odds_auc = 0.0;
};

// Exclusion: at each kappa, the floor(kappa*d) features with largest |phi|
// (ties to the lower index) are replaced by the baseline before re-scoring.
CurveReport exclusion_curve(const DecisionFn& decide, const ProbFn& prob,
                            const std::vector<Vector>& xs, const std::vector<int>& labels,
                            const std::vector<Vector>& phis, const Vector& baseline,
                            const std::vector<double>& kappa_grid_percent);

// Inclusion: only the top floor(kappa*d) features are retained; at kappa=100
// the input is passed through untouched.
CurveReport inclusion_curve(const DecisionFn& decide, const ProbFn& prob,
                            const std::vector<Vector>& xs, const std::vector<int>& labels,
                            const std::vector<Vector>& phis, const Vector& baseline,
                            const std::vector<double>& kappa_grid_percent);

// Mean negative log probability ratio when feature p is mean-imputed away.
double log_odds_feature(const ProbFn& prob, const std::vector<Vector>& xs, std::size_t p,
                        const Vector& baseline);

// Max observed Lipschitz ratio of the explanation map over n_perturb uniform
// draws in the epsilon-ball around x.
double sensitivity(const std::function<Vector(const Vector&)>& explainer_fn, const Vector& x,
                   double eps, std::size_t n_perturb, SeededRng& rng);

// Fraction of samples whose argmax |phi| coincides (ties to the lower index).
double top1_agreement(const std::vector<Vector>& phis_a, const std::vector<Vector>& phis_b);

std::size_t top1_feature(const Vector& phi);

// Feature indices ordered by decreasing |phi|, ties to the lower index.
std::vector<std::size_t> rank_features(const Vector& phi);

double trapezoid_auc(const std::vector<double>& x01, const std::vector<double>& y);

}  // namespace xad
