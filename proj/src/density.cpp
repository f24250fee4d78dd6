#include "liebridge/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "liebridge/errors.hpp"
#include "liebridge/parallel.hpp"
#include "liebridge/rng.hpp"

namespace liebridge {

std::string to_string(QConvention c) {
    return c == QConvention::euclidean_consistent ? "euclidean_consistent" : "paper_verbatim";
}

QConvention parse_q_convention(std::string_view s) {
    if (s == "euclidean_consistent") {
        return QConvention::euclidean_consistent;
    }
    if (s == "paper_verbatim") {
        return QConvention::paper_verbatim;
    }
    throw ArgumentError("unknown q convention '" + std::string(s) + "'");
}

double log_q_factor(double T, const GroupElement& v, const MetricTensor& a, QConvention convention) {
    if (!(T > 0.0)) {
        throw ArgumentError("horizon T must be positive");
    }
    const double r2 = a.norm_squared(group_log(v));
    const double log_det = std::log(a.determinant());
    const double log_2pi_t = std::log(2.0 * std::numbers::pi * T);
    const double exponent = -r2 / (2.0 * T);
    if (convention == QConvention::euclidean_consistent) {
        return 0.5 * log_det - 1.5 * log_2pi_t + exponent;
    }
    return 1.5 * (log_det - log_2pi_t) + exponent;
}

double q_factor(double T, const GroupElement& v, const MetricTensor& a, QConvention convention) {
    return std::exp(log_q_factor(T, v, a, convention));
}

WeightSummary summarize_log_weights(std::vector<double> log_w) {
    if (log_w.size() < 2) {
        throw ArgumentError("at least 2 weights are required");
    }
    std::erase_if(log_w, [](double x) { return !std::isfinite(x); });
    if (log_w.empty()) {
        throw DegenerateWeights("all importance weights are degenerate");
    }
    std::sort(log_w.begin(), log_w.end());
    const double shift = log_w.back();
    const auto n = static_cast<double>(log_w.size());
    double s1 = 0.0;
    double s2 = 0.0;
    for (double lw : log_w) {
        const double w = std::exp(lw - shift);
        s1 += w;
        s2 += w * w;
    }
    const double mean = s1 / n;
    double ss = 0.0;
    for (double lw : log_w) {
        const double d = std::exp(lw - shift) - mean;
        ss += d * d;
    }
    WeightSummary out;
    out.log_mean = shift + std::log(mean);
    out.log_sd = n > 1 ? shift + 0.5 * std::log(ss / (n - 1.0)) : -std::numeric_limits<double>::infinity();
    out.ess = s1 * s1 / s2;
    return out;
}

EstimatorReport estimate_heat_kernel(const GroupElement& v, const MetricTensor& a, double T, int k,
                                     int n_bridges, const IntegratorConfig& cfg, PhiFormula formula,
                                     QConvention convention, unsigned workers) {
    if (n_bridges < 2) {
        throw ArgumentError("at least 2 bridges are required");
    }
    const double log_q = log_q_factor(T, v, a, convention);
    const TimeGrid grid = uniform_grid(T, k);
    const Frame frame = frame_from_metric(a);

    std::vector<double> log_w(static_cast<std::size_t>(n_bridges));
    std::vector<int> hits(log_w.size(), 0);
    parallel_for(log_w.size(), workers, [&](std::size_t j) {
        IntegratorConfig c = cfg;
        c.seed = substream_seed(cfg.seed, j);
        log_w[j] = guided_log_phi(v, a, frame, grid, c, formula, &hits[j]);
    });

    const WeightSummary w = summarize_log_weights(log_w);
    EstimatorReport r;
    r.log_p_hat = log_q + w.log_mean;
    r.p_hat = std::exp(r.log_p_hat);
    r.std_error = std::exp(log_q + w.log_sd - 0.5 * std::log(static_cast<double>(n_bridges)));
    r.ess = w.ess;
    r.n_bridges = n_bridges;
    for (int h : hits) {
        r.cut_hits += h;
    }
    r.formula = formula;
    r.q_convention = convention;
    r.log_weights = std::move(log_w);
    return r;
}

}  // namespace liebridge
