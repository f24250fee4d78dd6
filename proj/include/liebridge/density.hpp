#pragma once

// Heat-kernel estimation p(T, e, v) = q(T, v) * E[phi_T] by importance sampling
// over guided bridges.

#include <string>
#include <string_view>
#include <vector>

#include "liebridge/bridge.hpp"

namespace liebridge {

/// Normalization of the Gaussian prefactor.
///   euclidean_consistent: (det A)^{1/2} (2 pi T)^{-3/2} exp(-|Log|_A^2 / 2T)
///   paper_verbatim:       (det A / (2 pi T))^{3/2}  exp(-|Log|_A^2 / 2T)
enum class QConvention { euclidean_consistent, paper_verbatim };

std::string to_string(QConvention c);
QConvention parse_q_convention(std::string_view s);

struct EstimatorReport {
    double p_hat = 0.0;
    double log_p_hat = 0.0;
    double std_error = 0.0;
    double ess = 0.0;
    int n_bridges = 0;
    int cut_hits = 0;
    PhiFormula formula = PhiFormula::derived;
    QConvention q_convention = QConvention::euclidean_consistent;
    /// Per-bridge log phi_T, in bridge order.
    std::vector<double> log_weights;
};

double log_q_factor(double T, const GroupElement& v, const MetricTensor& a,
                    QConvention convention = QConvention::euclidean_consistent);

/// Throws ArgumentError for T <= 0, CutLocusError if v is on the cut locus of e.
double q_factor(double T, const GroupElement& v, const MetricTensor& a,
                QConvention convention = QConvention::euclidean_consistent);

struct WeightSummary {
    /// log of the mean weight
    double log_mean = 0.0;
    /// log of the sample standard deviation of the weights (-inf when all equal)
    double log_sd = 0.0;
    double ess = 0.0;
};

/// Log-sum-exp reduction over the weights exp(log_w). Summation runs over the sorted
/// values so the result does not depend on input order. Throws DegenerateWeights when
/// no weight is finite, ArgumentError for fewer than 2 weights.
WeightSummary summarize_log_weights(std::vector<double> log_w);

/// Density of the endpoint law at v with respect to the Haar measure normalized to
/// Lebesgue measure on axis-angle coordinates (the Riemannian volume of the unit metric).
/// Bridge j uses substream_seed(cfg.seed, j). Requires n_bridges >= 2 and k >= 2.
EstimatorReport estimate_heat_kernel(const GroupElement& v, const MetricTensor& a, double T, int k,
                                     int n_bridges, const IntegratorConfig& cfg,
                                     PhiFormula formula = PhiFormula::derived,
                                     QConvention convention = QConvention::euclidean_consistent,
                                     unsigned workers = 1);

}  // namespace liebridge
