#include "liebridge/bridge.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "liebridge/errors.hpp"
#include "liebridge/parallel.hpp"
#include "liebridge/rng.hpp"

namespace liebridge {

std::string to_string(PhiFormula f) {
    return f == PhiFormula::derived ? "derived" : "paper_verbatim";
}

PhiFormula parse_phi_formula(std::string_view s) {
    if (s == "derived") {
        return PhiFormula::derived;
    }
    if (s == "paper_verbatim") {
        return PhiFormula::paper_verbatim;
    }
    throw ArgumentError("unknown phi formula '" + std::string(s) + "'");
}

namespace {

std::optional<AlgebraVector> log_to_target(const GroupElement& y, const GroupElement& v) {
    try {
        return group_log(GroupElement(y.matrix().transpose() * v.matrix()));
    } catch (const CutLocusError&) {
        return std::nullopt;
    }
}

void check_horizon(double t, double T) {
    if (!(t < T)) {
        throw HorizonError("time " + std::to_string(t) + " is not before the horizon " + std::to_string(T));
    }
}

}  // namespace

AlgebraVector guiding_term(const GroupElement& y, const GroupElement& v, double t, double T, int& cut_hits) {
    check_horizon(t, T);
    const auto w = log_to_target(y, v);
    if (!w) {
        ++cut_hits;
        return AlgebraVector::Zero();
    }
    return *w / (T - t);
}

double log_phi_increment(double r, double theta, double t, double T, double dt, PhiFormula formula) {
    check_horizon(t, T);
    if (!(r >= 0.0)) {
        throw DomainError("negative radius");
    }
    const double slope = dlog_theta(theta);
    if (formula == PhiFormula::derived) {
        return -theta * slope * dt / (2.0 * (T - t));
    }
    // d/dr log Theta along the A-radial direction is slope * theta / r.
    return r * theta * slope * dt / (T - t);
}

double log_phi_increment(double r, double t, double T, double dt, PhiFormula formula) {
    return log_phi_increment(r, r, t, T, dt, formula);
}

namespace {

// Integrates one guided path; records into `out` when given.
double run_bridge(const GroupElement& start, const GroupElement& target, const MetricTensor& a,
                  const Frame& frame, const TimeGrid& grid, const IntegratorConfig& cfg, PhiFormula formula,
                  int& cut_hits, BridgeSample* out) {
    NormalStream normal(cfg.seed);
    const double sd = std::sqrt(grid.dt);
    const double T = grid.horizon();
    const int k = grid.steps();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    GroupElement y = start;
    double log_phi = 0.0;
    if (out) {
        out->path.states.push_back(y);
        out->log_phi_cum.push_back(0.0);
    }
    for (int i = 0; i < k; ++i) {
        const double t = grid.t[i];
        const auto w = log_to_target(y, target);
        AlgebraVector drift = AlgebraVector::Zero();
        double r = nan;
        if (w) {
            r = a.norm(*w);
            drift = *w / (T - t);
            log_phi += log_phi_increment(r, w->norm(), t, T, grid.dt, formula);
        } else {
            ++cut_hits;
        }
        const double n1 = normal();
        const double n2 = normal();
        const double n3 = normal();
        y = integrator_step(cfg, y, frame, sd * Vec3(n1, n2, n3), grid.dt, drift);
        if (out) {
            out->radial.push_back(r);
            out->path.states.push_back(y);
            out->log_phi_cum.push_back(log_phi);
        }
    }
    if (out) {
        const auto w = log_to_target(y, target);
        out->radial.push_back(w ? a.norm(*w) : nan);
    }
    if (!std::isfinite(log_phi)) {
        throw NumericalError("non-finite log-phi accumulated along a guided path");
    }
    return log_phi;
}

}  // namespace

BridgeSample sample_guided_bridge(const GroupElement& target, const MetricTensor& a, double T, int k,
                                  const IntegratorConfig& cfg, PhiFormula formula, const GroupElement& start) {
    if (k < 2) {
        throw ArgumentError("a guided bridge needs at least 2 steps");
    }
    const TimeGrid grid = uniform_grid(T, k);
    const Frame frame = frame_from_metric(a);
    BridgeSample s;
    s.path.grid = grid;
    s.path.seed = cfg.seed;
    s.path.states.reserve(grid.t.size());
    s.radial.reserve(grid.t.size());
    s.log_phi_cum.reserve(grid.t.size());
    s.target = target;
    s.formula = formula;
    s.log_phi = run_bridge(start, target, a, frame, grid, cfg, formula, s.cut_hits, &s);
    return s;
}

std::vector<BridgeSample> sample_guided_bridges(const GroupElement& target, const MetricTensor& a, double T,
                                                int k, const IntegratorConfig& cfg, std::size_t n,
                                                PhiFormula formula, unsigned workers) {
    std::vector<BridgeSample> out(n);
    parallel_for(n, workers, [&](std::size_t j) {
        IntegratorConfig c = cfg;
        c.seed = substream_seed(cfg.seed, j);
        out[j] = sample_guided_bridge(target, a, T, k, c, formula);
    });
    return out;
}

double guided_log_phi(const GroupElement& target, const MetricTensor& a, const Frame& frame,
                      const TimeGrid& grid, const IntegratorConfig& cfg, PhiFormula formula, int* cut_hits) {
    if (grid.steps() < 2) {
        throw ArgumentError("a guided bridge needs at least 2 steps");
    }
    int hits = 0;
    const double lp = run_bridge(GroupElement::identity(), target, a, frame, grid, cfg, formula, hits, nullptr);
    if (cut_hits) {
        *cut_hits += hits;
    }
    return lp;
}

std::vector<RadialPoint> radial_series(const BridgeSample& sample) {
    std::vector<RadialPoint> out;
    out.reserve(sample.radial.size());
    for (std::size_t i = 0; i < sample.radial.size(); ++i) {
        const double r = sample.radial[i];
        out.push_back({sample.path.grid.t[i], r, r * r});
    }
    return out;
}

double half_laplacian_r2(const GroupElement& y, const GroupElement& v, const MetricTensor& a, double h) {
    const Frame frame = frame_from_metric(a);
    const auto f = [&](const GroupElement& x) {
        const double r = distance(x, v, a);
        return r * r;
    };
    const double center = f(y);
    double lap = 0.0;
    for (const auto& vi : frame.basis) {
        const double plus = f(y * group_exp(h * vi));
        const double minus = f(y * group_exp(-h * vi));
        lap += (plus - 2.0 * center + minus) / (h * h);
    }
    // V_0 vanishes on SO(3), so the Laplacian is sum_i V_i^2.
    return 0.5 * lap;
}

RadialBoundConfig calibrate_radial_bound(const std::vector<BridgeSample>& samples, const MetricTensor& a,
                                         std::size_t stride) {
    if (stride == 0) {
        stride = 1;
    }
    struct Point {
        double r2;
        double half_lap;
    };
    std::vector<Point> points;
    for (const auto& s : samples) {
        for (std::size_t i = 0; i < s.path.states.size(); i += stride) {
            if (!std::isfinite(s.radial[i]) || rotation_angle(s.path.states[i].inverse() * s.target) >
                                                    std::numbers::pi - 1e-2) {
                continue;
            }
            points.push_back({s.radial[i] * s.radial[i], half_laplacian_r2(s.path.states[i], s.target, a)});
        }
    }
    RadialBoundConfig cfg;
    double sup = 0.0;
    for (const auto& p : points) {
        sup = std::max(sup, p.half_lap);
    }
    cfg.nu = std::max(1.0, sup);
    double lambda = 0.0;
    for (const auto& p : points) {
        if (p.r2 > 1e-8) {
            lambda = std::max(lambda, (p.half_lap - cfg.nu) / p.r2);
        }
    }
    cfg.lambda = lambda;
    return cfg;
}

RadialBoundReport check_radial_bound(const std::vector<BridgeSample>& samples, const RadialBoundConfig& cfg,
                                     const MetricTensor& a) {
    if (samples.empty()) {
        throw ArgumentError("radial bound check needs at least one sample");
    }
    if (!(cfg.nu >= 1.0)) {
        throw ArgumentError("nu must be >= 1");
    }
    const auto& grid = samples.front().path.grid;
    const double T = grid.horizon();
    const double r0 = distance(GroupElement::identity(), samples.front().target, a);

    // Cut-locus points are charged the largest distance any point can have.
    const double cut_r = std::numbers::pi * std::sqrt(Eigen::SelfAdjointEigenSolver<Mat3>(a.matrix()).eigenvalues().maxCoeff());

    RadialBoundReport report;
    report.nu = cfg.nu;
    report.lambda = cfg.lambda;
    for (std::size_t i = 1; i + 1 < grid.t.size(); ++i) {
        const double t = grid.t[i];
        double sum = 0.0;
        for (const auto& s : samples) {
            const double r = s.radial[i];
            const double rr = std::isfinite(r) ? r : cut_r;
            sum += rr * rr;
        }
        const double mean = sum / static_cast<double>(samples.size());
        const double ratio = (T - t) / t;
        const double bound = (r0 * r0 + cfg.nu * t * (t / (T - t))) * ratio * ratio * std::exp(cfg.lambda * t);
        const bool violated = mean > bound;
        report.rows.push_back({t, mean, bound, violated});
        report.violations += violated ? 1 : 0;
    }
    // sup estimate over a thinned set of visited states
    double sup = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, grid.t.size() / 10);
    for (std::size_t j = 0; j < std::min<std::size_t>(samples.size(), 64); ++j) {
        const auto& s = samples[j];
        for (std::size_t i = 0; i < s.path.states.size(); i += stride) {
            if (std::isfinite(s.radial[i]) &&
                rotation_angle(s.path.states[i].inverse() * s.target) < std::numbers::pi - 1e-2) {
                sup = std::max(sup, half_laplacian_r2(s.path.states[i], s.target, a));
            }
        }
    }
    report.sup_half_laplacian = sup;
    return report;
}

}  // namespace liebridge
