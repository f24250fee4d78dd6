#pragma once

// Metric recovery from Brownian endpoints by iterative maximum likelihood over
// importance-sampled heat-kernel estimates.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "liebridge/density.hpp"

namespace liebridge {

struct ObservationSet {
    std::vector<GroupElement> endpoints;
    double T = 1.0;
    std::uint64_t gen_seed = 0;
    std::optional<MetricTensor> true_metric;
};

/// log_diagonal: (log a11, log a22, log a33), metric must be diagonal.
/// log_cholesky: (log L00, L10, log L11, L20, L21, log L22) with A = L L^T.
enum class Parameterization { log_diagonal, log_cholesky };

std::string to_string(Parameterization p);
Parameterization parse_parameterization(std::string_view s);

std::vector<double> to_parameters(const MetricTensor& a, Parameterization p);
MetricTensor from_parameters(std::span<const double> theta, Parameterization p);

struct MleConfig {
    double lr = 0.2;
    int iters = 200;
    int bridges_per_obs = 4;
    int steps = 20;
    double fd_step = 1e-3;
    Parameterization param = Parameterization::log_diagonal;
    /// Reuse the same noise for every metric evaluated.
    bool crn = true;
    /// Stop once the per-observation gradient norm drops below this.
    double grad_tol = 1e-2;
    PhiFormula formula = PhiFormula::derived;
    QConvention q_convention = QConvention::euclidean_consistent;
    Scheme scheme = Scheme::euler_heun;
    unsigned workers = 1;
};

/// n Brownian endpoints at time T from the identity; endpoint i uses substream_seed(seed, i).
ObservationSet sample_observations(const MetricTensor& a_true, int n, double T, int k, std::uint64_t seed,
                                   Scheme scheme = Scheme::euler_heun, unsigned workers = 1);

struct LikelihoodResult {
    double value = 0.0;
    /// log p_hat per observation; NaN for skipped ones
    std::vector<double> per_observation;
    /// Observations dropped because their weights were degenerate or they sat on the cut locus.
    int skipped = 0;
};

/// Observation i is estimated with noise seed substream_seed(seed, i).
LikelihoodResult evaluate_log_likelihood(const MetricTensor& a, const ObservationSet& obs, const MleConfig& cfg,
                                         std::uint64_t seed);

/// Sum of log p_hat(T, e, v_i; a) over the observations.
double log_likelihood(const MetricTensor& a, const ObservationSet& obs, const MleConfig& cfg, std::uint64_t seed);

/// Central differences of f at theta with the given step.
std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> theta, double step);

/// Per-observation central-difference scores: result[i][p] = d log p_hat_i / d theta_p.
std::vector<std::vector<double>> fd_scores(const MetricTensor& a, const ObservationSet& obs, const MleConfig& cfg,
                                           std::uint64_t seed);

/// Gradient of the total log-likelihood in parameter space.
std::vector<double> fd_gradient(const MetricTensor& a, const ObservationSet& obs, const MleConfig& cfg,
                                std::uint64_t seed);

struct MleIterate {
    int iter = 0;
    MetricTensor metric = MetricTensor::identity();
    double log_likelihood = 0.0;
    /// Norm of the per-observation gradient that drives the update.
    double grad_norm = 0.0;
};

enum class MleStatus { converged, budget_exhausted, non_finite };

struct MleTrace {
    /// Record i holds the iterate before update i; the last record is the final metric.
    std::vector<MleIterate> records;
    MleStatus status = MleStatus::budget_exhausted;
    std::string message;

    const MetricTensor& final_metric() const { return records.back().metric; }
};

/// Gradient ascent on the mean log-likelihood: theta <- theta + lr * grad / n.
/// A non-finite likelihood or gradient stops the run with status non_finite and the
/// partial trace. `on_iterate` is called after each record is appended.
MleTrace fit_metric(const ObservationSet& obs, const MetricTensor& init, const MleConfig& cfg, std::uint64_t seed,
                    const std::function<void(const MleIterate&)>& on_iterate = {});

}  // namespace liebridge
