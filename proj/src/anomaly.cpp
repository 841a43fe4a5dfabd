#include "xad/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "xad/errors.hpp"

namespace xad {

AnomalyScore score(const SSCaeModel& model, const Vector& x, const ScoreConfig& cfg) {
    if (cfg.gamma < 0.0 || cfg.gamma > 1.0)
        throw ConfigError("score: gamma must lie in [0, 1]");
    const ForwardTrace trace = forward(model, x);
    AnomalyScore s;
    s.re = squared_distance(x, trace.xhat());
    s.latent_norm = l2_norm(trace.z());
    s.score = cfg.gamma * s.re + (1.0 - cfg.gamma) * s.latent_norm;
    s.is_anomaly = s.score > cfg.tau ? 1 : 0;
    return s;
}

std::vector<AnomalyScore> score_all(const SSCaeModel& model, const Dataset& ds,
                                    const ScoreConfig& cfg) {
    std::vector<AnomalyScore> out;
    out.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(score(model, ds.row(i), cfg));
    return out;
}

double nearest_rank_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("quantile of an empty sample");
    if (q <= 0.0 || q > 1.0) throw ConfigError("quantile must lie in (0, 1]");
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(rank, 1) - 1];
}

double calibrate_threshold(const SSCaeModel& model, const Dataset& validation, double gamma,
                           double q) {
    ScoreConfig cfg;
    cfg.gamma = gamma;
    cfg.tau = 0.0;
    std::vector<double> normal_scores;
    for (std::size_t i = 0; i < validation.size(); ++i) {
        if (validation.y[i] == 0) normal_scores.push_back(score(model, validation.row(i), cfg).score);
    }
    if (normal_scores.empty())
        throw DataError("calibrate_threshold: no normal-labeled rows available");
    return nearest_rank_quantile(std::move(normal_scores), q);
}

void write_score_csv(const std::string& path, const Dataset& ds,
                     const std::vector<AnomalyScore>& scores) {
    if (scores.size() != ds.size()) throw DimensionError("score rows do not match dataset size");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write score report: " + path);
    out << "sample_id,re,latent_norm,score,is_anomaly,true_label\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out << ds.ids[i] << ',' << format_double(scores[i].re) << ','
            << format_double(scores[i].latent_norm) << ',' << format_double(scores[i].score)
            << ',' << scores[i].is_anomaly << ',' << ds.y[i] << '\n';
    }
}

}  // namespace xad
