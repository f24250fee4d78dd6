#pragma once

// Guided diffusion bridges on SO(3) and their importance weights.
//
// The guided process adds the drift group_log(y^{-1} v)/(T - t) to the
// Brownian SDE, pulling the path onto the target v at time T. Its law differs
// from the Brownian bridge by the correction weight phi_T, accumulated here in
// log form along the discretized path.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "liebridge/integrator.hpp"
#include "liebridge/so3.hpp"

namespace liebridge {

/// Integrand used for the log-phi accumulation.
///   derived:        -theta dlog_theta(theta) / (2(T - t)) dt
///   paper_verbatim:  r^2 (d/dr log Theta) / (T - t) dt
/// where r is the A-norm distance to the target and theta the rotation angle.
enum class PhiFormula { derived, paper_verbatim };

std::string to_string(PhiFormula f);
PhiFormula parse_phi_formula(std::string_view s);

struct BridgeSample {
    SamplePath path;
    /// log phi_T
    double log_phi = 0.0;
    /// Distance to the target at each grid point; NaN where the point is on the cut locus.
    std::vector<double> radial;
    /// Running log-phi at each grid point (0 at t = 0).
    std::vector<double> log_phi_cum;
    GroupElement target;
    int cut_hits = 0;
    PhiFormula formula = PhiFormula::derived;
};

/// group_log(y^{-1} v)/(T - t). Under the group-logarithm distance surrogate this
/// does not depend on the metric. Returns zero and increments cut_hits when
/// y^{-1} v is on the cut locus. Throws HorizonError if t >= T.
AlgebraVector guiding_term(const GroupElement& y, const GroupElement& v, double t, double T, int& cut_hits);

/// Log-phi increment over [t, t + dt] at distance r and rotation angle theta.
/// Throws DomainError for theta outside [0, 2pi) or r < 0, HorizonError if t >= T.
double log_phi_increment(double r, double theta, double t, double T, double dt,
                         PhiFormula formula = PhiFormula::derived);

/// Unit bi-invariant metric, where r and theta coincide.
double log_phi_increment(double r, double t, double T, double dt, PhiFormula formula = PhiFormula::derived);

/// One guided bridge from `start` (default identity) to `target`, noise from cfg.seed.
/// Requires k >= 2.
BridgeSample sample_guided_bridge(const GroupElement& target, const MetricTensor& a, double T, int k,
                                  const IntegratorConfig& cfg, PhiFormula formula = PhiFormula::derived,
                                  const GroupElement& start = GroupElement::identity());

/// n bridges from the identity; bridge j uses substream_seed(cfg.seed, j).
std::vector<BridgeSample> sample_guided_bridges(const GroupElement& target, const MetricTensor& a, double T,
                                                int k, const IntegratorConfig& cfg, std::size_t n,
                                                PhiFormula formula = PhiFormula::derived,
                                                unsigned workers = 1);

/// log phi_T only, without recording the path. Same noise as sample_guided_bridge.
double guided_log_phi(const GroupElement& target, const MetricTensor& a, const Frame& frame,
                      const TimeGrid& grid, const IntegratorConfig& cfg, PhiFormula formula,
                      int* cut_hits = nullptr);

struct RadialPoint {
    double t;
    double r;
    double r2;
};

std::vector<RadialPoint> radial_series(const BridgeSample& sample);

/// Growth constants in 1/2 Laplacian(r^2) <= nu + lambda r^2.
struct RadialBoundConfig {
    double nu = 1.0;
    double lambda = 0.0;
};

struct RadialBoundRow {
    double t;
    double mean_r2;
    double bound;
    bool violated;
};

struct RadialBoundReport {
    std::vector<RadialBoundRow> rows;
    int violations = 0;
    double nu = 0.0;
    double lambda = 0.0;
    /// Largest 1/2 Laplacian(r^2) seen over the sampled states.
    double sup_half_laplacian = 0.0;
};

/// 1/2 Laplacian of y -> distance(y, v, a)^2, by central second differences along the frame.
double half_laplacian_r2(const GroupElement& y, const GroupElement& v, const MetricTensor& a, double h = 1e-3);

/// Smallest constants satisfying the growth condition over the states visited by
/// the samples: nu = max(1, sup 1/2 Laplacian r^2), lambda = max(0, sup (1/2 Laplacian r^2 - nu)/r^2).
RadialBoundConfig calibrate_radial_bound(const std::vector<BridgeSample>& samples, const MetricTensor& a,
                                         std::size_t stride = 1);

/// Compares the empirical mean of r^2 at every interior grid time with
///   (r_v(e)^2 + nu t (t/(T - t))) ((T - t)/t)^2 exp(lambda t).
/// Samples must share grid and target. Throws ArgumentError on nu < 1 or empty input.
RadialBoundReport check_radial_bound(const std::vector<BridgeSample>& samples, const RadialBoundConfig& cfg,
                                     const MetricTensor& a);

}  // namespace liebridge
