#pragma once

#include <string>
#include <vector>

#include "xad/dataset.hpp"
#include "xad/sscae.hpp"

namespace xad {

enum class ThresholdPolicy { fixed, quantile };

struct ScoreConfig {
    double gamma = 0.5;  // blend between reconstruction error and latent norm
    double tau = 0.0;
    ThresholdPolicy policy = ThresholdPolicy::quantile;
    double quantile = 0.95;  // taken over normal validation scores
};

struct AnomalyScore {
    double re = 0.0;           // squared reconstruction distance
    double latent_norm = 0.0;  // Euclidean norm of the bottleneck
    double score = 0.0;        // gamma * re + (1 - gamma) * latent_norm
    int is_anomaly = 0;        // 1 iff score > tau
};

AnomalyScore score(const SSCaeModel& model, const Vector& x, const ScoreConfig& cfg);

std::vector<AnomalyScore> score_all(const SSCaeModel& model, const Dataset& ds,
                                    const ScoreConfig& cfg);

// Nearest-rank quantile of the blended scores over normal-labeled rows of the
// validation set.
double calibrate_threshold(const SSCaeModel& model, const Dataset& validation, double gamma,
                           double q);

// Nearest-rank quantile of an arbitrary sample (lower value on ties).
double nearest_rank_quantile(std::vector<double> values, double q);

void write_score_csv(const std::string& path, const Dataset& ds,
                     const std::vector<AnomalyScore>& scores);

}  // namespace xad
