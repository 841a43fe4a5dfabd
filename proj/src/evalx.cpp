#include "xad/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xad/errors.hpp"

namespace xad {

namespace {

constexpr double kProbFloor = 1e-12;

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

struct CurveMode {
    bool exclusion;
};

Vector ablate(const Vector& x, const std::vector<std::size_t>& ranked, std::size_t k,
              const Vector& baseline, bool exclusion) {
    if (!exclusion && k == x.size()) return x;  // full retention is exact
    Vector out = exclusion ? x : baseline;
    if (exclusion) {
        for (std::size_t r = 0; r < k; ++r) out[ranked[r]] = baseline[ranked[r]];
    } else {
        for (std::size_t r = 0; r < k; ++r) out[ranked[r]] = x[ranked[r]];
    }
    return out;
}

CurveReport run_curve(const DecisionFn& decide, const ProbFn& prob, const std::vector<Vector>& xs,
                      const std::vector<int>& labels, const std::vector<Vector>& phis,
                      const Vector& baseline, const std::vector<double>& kappa_grid,
                      CurveMode mode) {
    if (xs.empty()) throw DataError("attribution curve: no samples");
    if (xs.size() != labels.size() || xs.size() != phis.size())
        throw DimensionError("attribution curve: samples, labels and attributions disagree");
    const std::size_t d = xs.front().size();

    std::vector<std::vector<std::size_t>> ranked(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ranked[i] = rank_features(phis[i]);

    // Predicted outcome on the original input, for the log-odds ratio.
    std::vector<int> pred_class(xs.size());
    std::vector<double> p_orig(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double p = clamp_prob(prob(xs[i]));
        pred_class[i] = p >= 0.5 ? 1 : 0;
        p_orig[i] = pred_class[i] == 1 ? p : 1.0 - p;
    }

    CurveReport report;
    std::vector<double> grid_frac;
    for (const double kappa : kappa_grid) {
        if (kappa < 0.0 || kappa > 100.0)
            throw ConfigError("kappa grid values must lie in [0, 100]");
        const auto k = static_cast<std::size_t>(
            std::floor(kappa / 100.0 * static_cast<double>(d)));
        std::size_t correct = 0;
        double lo_sum = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const Vector xa = ablate(xs[i], ranked[i], k, baseline, mode.exclusion);
            if (decide(xa) == labels[i]) ++correct;
            const double pm = clamp_prob(prob(xa));
            const double p_mod = pred_class[i] == 1 ? pm : 1.0 - pm;
            lo_sum += std::log(clamp_prob(p_mod) / p_orig[i]);
        }
        CurvePoint pt;
        pt.kappa = kappa;
        pt.accuracy = static_cast<double>(correct) / static_cast<double>(xs.size());
        pt.log_odds = -lo_sum / static_cast<double>(xs.size());
        report.points.push_back(pt);
        grid_frac.push_back(kappa / 100.0);
    }

    std::vector<double> acc, lo;
    for (const auto& pt : report.points) {
        acc.push_back(pt.accuracy);
        lo.push_back(pt.log_odds);
    }
    report.accuracy_auc = trapezoid_auc(grid_frac, acc);
    report.log_odds_auc = trapezoid_auc(grid_frac, lo);
    return report;
}

}  // namespace

ClassificationReport classify_metrics(const std::vector<double>& scores,
                                      const std::vector<int>& labels, double tau) {
    if (scores.size() != labels.size())
        throw DimensionError("classify_metrics: scores and labels disagree in length");
    if (scores.empty()) throw DataError("classify_metrics: empty input");

    ClassificationReport r;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw DataError("classify_metrics: labels must be 0 or 1");
        const int pred = scores[i] > tau ? 1 : 0;
        if (pred == 1 && labels[i] == 1) ++r.tp;
        else if (pred == 1 && labels[i] == 0) ++r.fp;
        else if (pred == 0 && labels[i] == 0) ++r.tn;
        else ++r.fn;
    }
    const auto n = static_cast<double>(scores.size());
    r.acc = static_cast<double>(r.tp + r.tn) / n;
    r.precision = (r.tp + r.fp) > 0
                      ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp)
                      : 0.0;
    r.recall = (r.tp + r.fn) > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn)
                                 : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;

    // Unweighted average recall over the classes that are present.
    double recall_sum = 0.0;
    int classes = 0;
    if (r.tp + r.fn > 0) {
        recall_sum += r.recall;
        ++classes;
    }
    if (r.tn + r.fp > 0) {
        recall_sum += static_cast<double>(r.tn) / static_cast<double>(r.tn + r.fp);
        ++classes;
    }
    r.uar = classes > 0 ? 100.0 * recall_sum / static_cast<double>(classes) : 0.0;
    r.auc = roc_auc(scores, labels);
    return r;
}

std::optional<double> roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    // Trapezoid over the ROC polyline; groups of tied scores advance jointly.
    double auc = 0.0;
    double tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double d_tp = 0.0, d_fp = 0.0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? d_tp : d_fp) += 1.0;
            ++j;
        }
        auc += d_fp * (tp + d_tp / 2.0);
        tp += d_tp;
        fp += d_fp;
        i = j;
    }
    return auc / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<std::size_t> rank_features(const Vector& phi) {
    std::vector<std::size_t> idx(phi.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(phi[a]) > std::abs(phi[b]);
    });
    return idx;
}

std::size_t top1_feature(const Vector& phi) {
    if (phi.empty()) throw DataError("top1_feature: empty attribution");
    std::size_t best = 0;
    for (std::size_t j = 1; j < phi.size(); ++j)
        if (std::abs(phi[j]) > std::abs(phi[best])) best = j;
    return best;
}

CurveReport exclusion_curve(const DecisionFn& decide, const ProbFn& prob,
                            const std::vector<Vector>& xs, const std::vector<int>& labels,
                            const std::vector<Vector>& phis, const Vector& baseline,
                            const std::vector<double>& kappa_grid_percent) {
    return run_curve(decide, prob, xs, labels, phis, baseline, kappa_grid_percent, {true});
}

CurveReport inclusion_curve(const DecisionFn& decide, const ProbFn& prob,
                            const std::vector<Vector>& xs, const std::vector<int>& labels,
                            const std::vector<Vector>& phis, const Vector& baseline,
                            const std::vector<double>& kappa_grid_percent) {
    return run_curve(decide, prob, xs, labels, phis, baseline, kappa_grid_percent, {false});
}

double log_odds_feature(const ProbFn& prob, const std::vector<Vector>& xs, std::size_t p,
                        const Vector& baseline) {
    if (xs.empty()) throw DataError("log_odds: no samples");
    double acc = 0.0;
    for (const Vector& x : xs) {
        const double po = clamp_prob(prob(x));
        const int cls = po >= 0.5 ? 1 : 0;
        Vector xp = x;
        xp[p] = baseline[p];
        const double pm = clamp_prob(prob(xp));
        const double p_orig = cls == 1 ? po : 1.0 - po;
        const double p_mod = cls == 1 ? pm : 1.0 - pm;
        acc += std::log(clamp_prob(p_mod) / clamp_prob(p_orig));
    }
    return -acc / static_cast<double>(xs.size());
}

double sensitivity(const std::function<Vector(const Vector&)>& explainer_fn, const Vector& x,
                   double eps, std::size_t n_perturb, SeededRng& rng) {
    if (eps <= 0.0) throw ConfigError("sensitivity: eps must be positive");
    if (n_perturb == 0) throw ConfigError("sensitivity: n_perturb must be positive");
    const Vector phi_x = explainer_fn(x);
    const std::size_t d = x.size();
    double best = 0.0;
    for (std::size_t k = 0; k < n_perturb; ++k) {
        // Uniform draw in the eps-ball: random direction, radius eps*u^(1/d).
        Vector dir(d);
        double norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            dir[j] = rng.gaussian();
            norm2 += dir[j] * dir[j];
        }
        const double norm = std::sqrt(norm2);
        if (norm == 0.0) continue;
        const double radius =
            eps * std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
        Vector xj = x;
        for (std::size_t j = 0; j < d; ++j) xj[j] += dir[j] / norm * radius;
        const double dist = std::sqrt(squared_distance(x, xj));
        if (dist == 0.0) continue;  // degenerate draw
        const Vector phi_j = explainer_fn(xj);
        best = std::max(best, std::sqrt(squared_distance(phi_x, phi_j)) / dist);
    }
    return best;
}

double top1_agreement(const std::vector<Vector>& phis_a, const std::vector<Vector>& phis_b) {
    if (phis_a.size() != phis_b.size() || phis_a.empty())
        throw DimensionError("top1_agreement: attribution sets must match and be nonempty");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < phis_a.size(); ++i)
        if (top1_feature(phis_a[i]) == top1_feature(phis_b[i])) ++agree;
    return static_cast<double>(agree) / static_cast<double>(phis_a.size());
}

double trapezoid_auc(const std::vector<double>& x01, const std::vector<double>& y) {
    if (x01.size() != y.size() || x01.size() < 2)
        throw DimensionError("trapezoid_auc: need at least two aligned points");
    double auc = 0.0;
    for (std::size_t i = 1; i < x01.size(); ++i)
        auc += (x01[i] - x01[i - 1]) * (y[i] + y[i - 1]) / 2.0;
    return auc;
}

}  // namespace xad
