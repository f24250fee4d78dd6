#pragma once

// Stratonovich Brownian motion on SO(3) under a left-invariant metric.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "liebridge/so3.hpp"

namespace liebridge {

struct TimeGrid {
    std::vector<double> t;
    double dt = 0.0;

    double horizon() const { return t.back(); }
    int steps() const { return static_cast<int>(t.size()) - 1; }
};

/// k + 1 equally spaced points on [0, T]. Throws ArgumentError for T <= 0 or k < 1.
TimeGrid uniform_grid(double T, int k);

enum class Scheme { euler_heun, lie_exponential };

std::string to_string(Scheme s);
Scheme parse_scheme(std::string_view s);

struct IntegratorConfig {
    Scheme scheme = Scheme::euler_heun;
    bool reproject = true;
    std::uint64_t seed = 0;
};

struct SamplePath {
    TimeGrid grid;
    std::vector<GroupElement> states;
    std::uint64_t seed = 0;

    const GroupElement& endpoint() const { return states.back(); }
};

/// grid.steps() i.i.d. N(0, dt I_3) increments, coefficients on the frame basis.
std::vector<Vec3> gaussian_increments(std::uint64_t seed, const TimeGrid& grid);

/// Stratonovich Euler-Heun step:
///   predictor  xp = x + x hat(sum_i v_i db^i)
///   corrector  x' = x + x hat(-v0 dt/2 + extra_drift dt) + (x + xp)/2 hat(sum_i v_i db^i)
/// followed by polar reprojection when `reproject` is set.
GroupElement euler_heun_step(const GroupElement& x, const Frame& frame, const Vec3& db, double dt,
                             const AlgebraVector& extra_drift, bool reproject = true);

/// x exp(-v0 dt/2 + extra_drift dt + sum_i v_i db^i)
GroupElement lie_exponential_step(const GroupElement& x, const Frame& frame, const Vec3& db, double dt,
                                  const AlgebraVector& extra_drift);

/// Dispatches on cfg.scheme.
GroupElement integrator_step(const IntegratorConfig& cfg, const GroupElement& x, const Frame& frame,
                             const Vec3& db, double dt, const AlgebraVector& extra_drift);

/// One path from the identity, noise drawn from cfg.seed.
SamplePath sample_brownian_path(const MetricTensor& a, double T, int k, const IntegratorConfig& cfg);

/// n paths; path i uses substream_seed(cfg.seed, i).
std::vector<SamplePath> sample_brownian_paths(const MetricTensor& a, double T, int k,
                                              const IntegratorConfig& cfg, std::size_t n,
                                              unsigned workers = 1);

/// Endpoints only of the same n paths as sample_brownian_paths.
std::vector<GroupElement> sample_brownian_endpoints(const MetricTensor& a, double T, int k,
                                                    const IntegratorConfig& cfg, std::size_t n,
                                                    unsigned workers = 1);

}  // namespace liebridge
