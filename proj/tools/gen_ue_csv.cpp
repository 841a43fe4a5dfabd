// Generates the bundled UE KPI dataset: per-UE radio measurements with a
// binary anomaly label, written as a plain CSV. Four anomaly modes (coverage
// hole, interference, cell overload, equipment fault) perturb correlated KPI
// groups; a fraction of mild anomalies and stressed normal rows keeps the
// classes overlapping.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xad/numerics.hpp"

using xad::SeededRng;

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

struct Row {
    long long ts;
    int cell;
    int du;
    int ue;
    double rsrp, rsrq, rssinr;
    double rsrp_nb1, rsrq_nb1, rssinr_nb1;
    double rsrp_nb2, rsrq_nb2, rssinr_nb2;
    double prb_used_pct;
    double thp, target_thp;
    double pdcp_dl, pdcp_ul;
    double prb_dl, prb_ul;
    double cqi, bler;
    double x, y;
    int label;
};

double spectral_efficiency(double sinr_db) {
    const double snr = std::pow(10.0, sinr_db / 10.0);
    return std::min(std::log2(1.0 + snr), 7.8);
}

Row make_normal(SeededRng& rng, long long ts) {
    Row r{};
    r.ts = ts;
    r.cell = 1 + static_cast<int>(rng.uniform_int(8));
    r.du = 1001 + r.cell % 4;
    r.ue = 1 + static_cast<int>(rng.uniform_int(600));

    const double load = clamp(0.45 + 0.11 * rng.gaussian(), 0.05, 0.80);
    const double dist_km = clamp(0.05 + std::abs(0.22 * rng.gaussian()), 0.05, 0.7);
    const double shadow = 2.0 * rng.gaussian();

    r.rsrp = -75.0 - 30.0 * std::log10(dist_km / 0.05 + 1.0) - 4.0 * load + shadow;
    r.rssinr = 22.0 - 14.0 * load - 6.0 * std::log10(dist_km / 0.05 + 1.0) +
               1.5 * rng.gaussian();
    r.rsrq = -8.5 - 6.0 * load + 0.25 * (r.rssinr - 12.0) / 3.0 + 0.8 * rng.gaussian();

    const double nb1_gap = 3.0 + std::abs(4.0 * rng.gaussian());
    r.rsrp_nb1 = r.rsrp - nb1_gap + 2.0 * rng.gaussian();
    r.rssinr_nb1 = r.rssinr - 0.5 * nb1_gap + 2.0 * rng.gaussian();
    r.rsrq_nb1 = r.rsrq - 0.3 * nb1_gap + 1.0 * rng.gaussian();
    const double nb2_gap = nb1_gap + 2.0 + std::abs(3.0 * rng.gaussian());
    r.rsrp_nb2 = r.rsrp - nb2_gap + 2.0 * rng.gaussian();
    r.rssinr_nb2 = r.rssinr - 0.5 * nb2_gap + 2.0 * rng.gaussian();
    r.rsrq_nb2 = r.rsrq - 0.3 * nb2_gap + 1.0 * rng.gaussian();

    r.prb_used_pct = 100.0 * clamp(load + 0.08 * rng.gaussian(), 0.02, 1.0);

    const double classes[4] = {5.0, 10.0, 25.0, 50.0};
    r.target_thp = classes[rng.uniform_int(4)];
    r.cqi = clamp(std::round(1.0 + 14.0 / (1.0 + std::exp(-(r.rssinr - 8.0) / 6.0)) +
                             0.7 * rng.gaussian()),
                  1.0, 15.0);
    r.bler = clamp(0.45 / (1.0 + std::exp((r.rssinr - 7.0) / 4.0)) + 0.015 * rng.gaussian(),
                   0.001, 0.6);

    const double capacity = 18.0 * spectral_efficiency(r.rssinr) * (1.0 - 0.8 * load);
    r.thp = clamp(std::min(r.target_thp, capacity) * (1.0 - r.bler) *
                      (1.0 + 0.06 * rng.gaussian()),
                  0.05, 60.0);

    r.pdcp_dl = std::max(0.0, r.thp * 1e6 / 8.0 * 0.02 * (1.0 + 0.05 * rng.gaussian()));
    r.pdcp_ul = std::max(0.0, 0.12 * r.pdcp_dl * (1.0 + 0.1 * rng.gaussian()));
    r.prb_dl = clamp(2.73 * r.prb_used_pct * (0.7 + 0.1 * rng.gaussian()), 1.0, 273.0);
    r.prb_ul = clamp(0.3 * r.prb_dl * (1.0 + 0.1 * rng.gaussian()), 1.0, 273.0);

    const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double cx = 1200.0 * (r.cell % 4), cy = 1200.0 * (r.cell / 4);
    r.x = cx + 1000.0 * dist_km * std::cos(theta);
    r.y = cy + 1000.0 * dist_km * std::sin(theta);
    r.label = 0;
    return r;
}

enum class Mode { coverage_hole, interference, overload, fault };

void degrade(Row& r, Mode mode, double sev, SeededRng& rng) {
    auto u = [&](double lo, double hi) { return sev * rng.uniform(lo, hi); };
    switch (mode) {
        case Mode::coverage_hole:
            r.rsrp -= u(16, 32);
            r.rssinr -= u(10, 20);
            r.rsrq -= u(4, 9);
            r.rsrp_nb1 -= u(2, 10);
            r.rssinr_nb1 -= u(2, 8);
            r.rsrp_nb2 -= u(2, 10);
            r.rssinr_nb2 -= u(2, 8);
            r.thp *= clamp(1.0 - u(0.6, 0.95), 0.02, 1.0);
            r.bler = clamp(r.bler + u(0.05, 0.3), 0.001, 0.95);
            r.cqi = clamp(r.cqi - u(3, 8), 1.0, 15.0);
            break;
        case Mode::interference:
            r.rsrp -= u(0, 3);
            r.rssinr -= u(14, 24);
            r.rsrq -= u(4, 9);
            r.rssinr_nb1 -= u(4, 12);
            r.rssinr_nb2 -= u(4, 12);
            r.rsrq_nb1 -= u(1, 4);
            r.rsrq_nb2 -= u(1, 4);
            r.thp *= clamp(1.0 - u(0.55, 0.9), 0.02, 1.0);
            r.bler = clamp(r.bler + u(0.1, 0.35), 0.001, 0.95);
            r.cqi = clamp(r.cqi - u(2, 7), 1.0, 15.0);
            r.prb_used_pct = clamp(r.prb_used_pct + u(5, 20), 0.0, 100.0);
            break;
        case Mode::overload:
            r.prb_used_pct = clamp(r.prb_used_pct + u(45, 70), 0.0, 100.0);
            r.prb_dl = clamp(r.prb_dl + u(80, 150), 1.0, 273.0);
            r.prb_ul = clamp(r.prb_ul + u(20, 50), 1.0, 273.0);
            r.thp *= clamp(1.0 - u(0.6, 0.9), 0.03, 1.0);
            r.rssinr -= u(7, 13);
            r.rsrq -= u(4, 7);
            break;
        case Mode::fault:
            r.thp *= clamp(1.0 - u(0.85, 1.0), 0.0, 1.0);
            r.bler = clamp(r.bler + u(0.25, 0.55), 0.001, 0.98);
            r.cqi = clamp(r.cqi - u(5, 11), 1.0, 15.0);
            r.rsrp -= u(2, 8);
            r.rssinr -= u(3, 9);
            break;
    }
    // Dependent counters follow the degraded throughput.
    r.pdcp_dl = std::max(0.0, r.thp * 1e6 / 8.0 * 0.02 * (1.0 + 0.05 * rng.gaussian()));
    r.pdcp_ul = std::max(0.0, 0.12 * r.pdcp_dl * (1.0 + 0.1 * rng.gaussian()));
}

Mode pick_mode(SeededRng& rng) {
    const double u = rng.uniform01();
    if (u < 0.35) return Mode::coverage_hole;
    if (u < 0.65) return Mode::interference;
    if (u < 0.85) return Mode::overload;
    return Mode::fault;
}

// Idiosyncratic corruption on top of the mode signature; anomalous readings
// are scattered rather than forming their own compact manifold.
void scatter(Row& r, double sev, SeededRng& rng) {
    auto jolt = [&](double& v, double span, double lo, double hi) {
        if (rng.uniform01() < 0.35) {
            const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
            v = clamp(v + sign * sev * span * rng.uniform(0.3, 0.9), lo, hi);
        }
    };
    jolt(r.rsrp, 18.0, -145.0, -70.0);
    jolt(r.rsrq, 6.0, -24.0, -4.0);
    jolt(r.rssinr, 12.0, -20.0, 28.0);
    jolt(r.rsrp_nb1, 14.0, -145.0, -70.0);
    jolt(r.rsrq_nb1, 5.0, -24.0, -4.0);
    jolt(r.rssinr_nb1, 10.0, -22.0, 26.0);
    jolt(r.rsrp_nb2, 14.0, -150.0, -70.0);
    jolt(r.rsrq_nb2, 5.0, -26.0, -4.0);
    jolt(r.rssinr_nb2, 10.0, -24.0, 24.0);
    jolt(r.prb_used_pct, 35.0, 0.0, 100.0);
    jolt(r.thp, 14.0, 0.02, 60.0);
    jolt(r.cqi, 6.0, 1.0, 15.0);
    jolt(r.bler, 0.3, 0.001, 0.98);
    jolt(r.prb_dl, 90.0, 1.0, 273.0);
    jolt(r.prb_ul, 40.0, 1.0, 273.0);
    jolt(r.x, 900.0, -5000.0, 9000.0);
    jolt(r.y, 900.0, -5000.0, 9000.0);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UE KPI dataset generator"};
    std::string out_path = "data/ue.csv";
    std::size_t rows = 10000;
    double anomaly_rate = 0.25;
    std::uint64_t seed = 20240;
    double mild_fraction = 0.20;     // anomalies with strongly reduced severity
    double stressed_normals = 0.05;  // normal rows with borderline degradation
    app.add_option("-o,--out", out_path, "output CSV path");
    app.add_option("-n,--rows", rows, "number of rows");
    app.add_option("--anomaly-rate", anomaly_rate, "fraction of anomalous rows");
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--mild-fraction", mild_fraction, "fraction of mild anomalies");
    app.add_option("--stressed-normals", stressed_normals,
                   "fraction of normal rows with borderline stress");
    CLI11_PARSE(app, argc, argv);

    SeededRng rng(seed);
    const auto n_anom = static_cast<std::size_t>(std::llround(anomaly_rate * rows));

    std::vector<std::size_t> idx(rows);
    for (std::size_t i = 0; i < rows; ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<char> is_anom(rows, 0);
    for (std::size_t i = 0; i < n_anom; ++i) is_anom[idx[i]] = 1;

    std::ofstream out(out_path);
    if (!out) {
        std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
        return 1;
    }
    out << "measTimeStampRf,nrCellIdentity,du-id,ue-id,"
           "RF.serving.RSRP,RF.serving.RSRQ,RF.serving.RSSINR,"
           "rsrp_nb1,rsrq_nb1,rssinr_nb1,rsrp_nb2,rsrq_nb2,rssinr_nb2,"
           "RRU.PrbUsedDl,DRB.UEThpDl,TargetTput,UEPDCPBytesDL,UEPDCPBytesUL,"
           "UEPRBUsedDL,UEPRBUsedUL,CQI,BLER,x,y,Anomaly\n";

    char buf[640];
    for (std::size_t i = 0; i < rows; ++i) {
        Row r = make_normal(rng, 1605000000000LL + static_cast<long long>(i) * 20);
        if (is_anom[i]) {
            const double sev = rng.uniform01() < mild_fraction ? rng.uniform(0.25, 0.5) : 1.0;
            degrade(r, pick_mode(rng), sev, rng);
            scatter(r, sev, rng);
            r.label = 1;
        } else if (rng.uniform01() < stressed_normals) {
            degrade(r, pick_mode(rng), rng.uniform(0.08, 0.2), rng);
        }
        std::snprintf(buf, sizeof(buf),
                      "%lld,c%d,%d,ue%d,"
                      "%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,"
                      "%.2f,%.3f,%.1f,%.0f,%.0f,%.1f,%.1f,%.0f,%.4f,%.1f,%.1f,%d\n",
                      r.ts, r.cell, r.du, r.ue, r.rsrp, r.rsrq, r.rssinr, r.rsrp_nb1,
                      r.rsrq_nb1, r.rssinr_nb1, r.rsrp_nb2, r.rsrq_nb2, r.rssinr_nb2,
                      r.prb_used_pct, r.thp, r.target_thp, r.pdcp_dl, r.pdcp_ul, r.prb_dl,
                      r.prb_ul, r.cqi, r.bler, r.x, r.y, r.label);
        out << buf;
    }
    std::printf("wrote %zu rows (%zu anomalous) to %s\n", rows, n_anom, out_path.c_str());
    return 0;
}
