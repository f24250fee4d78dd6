#include "liebridge/integrator.hpp"

#include <cmath>

#include "liebridge/errors.hpp"
#include "liebridge/parallel.hpp"
#include "liebridge/rng.hpp"

namespace liebridge {

TimeGrid uniform_grid(double T, int k) {
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw ArgumentError("horizon T must be positive and finite");
    }
    if (k < 1) {
        throw ArgumentError("number of steps must be at least 1");
    }
    TimeGrid g;
    g.dt = T / k;
    g.t.resize(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i < k; ++i) {
        g.t[i] = i * g.dt;
    }
    g.t[k] = T;
    return g;
}

std::string to_string(Scheme s) {
    return s == Scheme::euler_heun ? "euler_heun" : "lie_exponential";
}

Scheme parse_scheme(std::string_view s) {
    if (s == "euler_heun") {
        return Scheme::euler_heun;
    }
    if (s == "lie_exponential") {
        return Scheme::lie_exponential;
    }
    throw ArgumentError("unknown integration scheme '" + std::string(s) + "'");
}

std::vector<Vec3> gaussian_increments(std::uint64_t seed, const TimeGrid& grid) {
    NormalStream normal(seed);
    const double sd = std::sqrt(grid.dt);
    std::vector<Vec3> db(static_cast<std::size_t>(grid.steps()));
    for (auto& v : db) {
        const double x = normal();
        const double y = normal();
        const double z = normal();
        v = sd * Vec3(x, y, z);
    }
    return db;
}

GroupElement euler_heun_step(const GroupElement& x, const Frame& frame, const Vec3& db, double dt,
                             const AlgebraVector& extra_drift, bool reproject) {
    const Mat3& m = x.matrix();
    const Mat3 noise = hat(frame.combine(db));
    const Mat3 predictor = m + m * noise;
    const Mat3 drift = hat(-0.5 * dt * frame.v0 + dt * extra_drift);
    const Mat3 next = m + m * drift + 0.5 * (m + predictor) * noise;
    if (!reproject) {
        if (!next.allFinite()) {
            throw NumericalError("Euler-Heun step produced non-finite entries");
        }
        return GroupElement(next);
    }
    return project_to_so3(next);
}

GroupElement lie_exponential_step(const GroupElement& x, const Frame& frame, const Vec3& db, double dt,
                                  const AlgebraVector& extra_drift) {
    const AlgebraVector xi = -0.5 * dt * frame.v0 + dt * extra_drift + frame.combine(db);
    return x * group_exp(xi);
}

GroupElement integrator_step(const IntegratorConfig& cfg, const GroupElement& x, const Frame& frame,
                             const Vec3& db, double dt, const AlgebraVector& extra_drift) {
    if (cfg.scheme == Scheme::lie_exponential) {
        return lie_exponential_step(x, frame, db, dt, extra_drift);
    }
    return euler_heun_step(x, frame, db, dt, extra_drift, cfg.reproject);
}

namespace {

SamplePath integrate(const Frame& frame, const TimeGrid& grid, const IntegratorConfig& cfg) {
    SamplePath path;
    path.grid = grid;
    path.seed = cfg.seed;
    path.states.reserve(grid.t.size());
    path.states.push_back(GroupElement::identity());
    const auto db = gaussian_increments(cfg.seed, grid);
    const AlgebraVector none = AlgebraVector::Zero();
    for (const auto& inc : db) {
        path.states.push_back(integrator_step(cfg, path.states.back(), frame, inc, grid.dt, none));
    }
    return path;
}

GroupElement integrate_endpoint(const Frame& frame, const TimeGrid& grid, const IntegratorConfig& cfg) {
    NormalStream normal(cfg.seed);
    const double sd = std::sqrt(grid.dt);
    const AlgebraVector none = AlgebraVector::Zero();
    GroupElement x;
    for (int i = 0; i < grid.steps(); ++i) {
        const double a = normal();
        const double b = normal();
        const double c = normal();
        x = integrator_step(cfg, x, frame, sd * Vec3(a, b, c), grid.dt, none);
    }
    return x;
}

IntegratorConfig with_seed(IntegratorConfig cfg, std::uint64_t seed) {
    cfg.seed = seed;
    return cfg;
}

}  // namespace

SamplePath sample_brownian_path(const MetricTensor& a, double T, int k, const IntegratorConfig& cfg) {
    return integrate(frame_from_metric(a), uniform_grid(T, k), cfg);
}

std::vector<SamplePath> sample_brownian_paths(const MetricTensor& a, double T, int k,
                                              const IntegratorConfig& cfg, std::size_t n,
                                              unsigned workers) {
    const Frame frame = frame_from_metric(a);
    const TimeGrid grid = uniform_grid(T, k);
    std::vector<SamplePath> paths(n);
    parallel_for(n, workers, [&](std::size_t i) {
        paths[i] = integrate(frame, grid, with_seed(cfg, substream_seed(cfg.seed, i)));
    });
    return paths;
}

std::vector<GroupElement> sample_brownian_endpoints(const MetricTensor& a, double T, int k,
                                                    const IntegratorConfig& cfg, std::size_t n,
                                                    unsigned workers) {
    const Frame frame = frame_from_metric(a);
    const TimeGrid grid = uniform_grid(T, k);
    std::vector<GroupElement> ends(n);
    parallel_for(n, workers, [&](std::size_t i) {
        ends[i] = integrate_endpoint(frame, grid, with_seed(cfg, substream_seed(cfg.seed, i)));
    });
    return ends;
}

}  // namespace liebridge
