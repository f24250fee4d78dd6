#include "liebridge/mle.hpp"

#include <cmath>
#include <limits>

#include "liebridge/errors.hpp"
#include "liebridge/parallel.hpp"
#include "liebridge/rng.hpp"

namespace liebridge {

std::string to_string(Parameterization p) {
    return p == Parameterization::log_diagonal ? "log_diagonal" : "log_cholesky";
}

Parameterization parse_parameterization(std::string_view s) {
    if (s == "log_diagonal") {
        return Parameterization::log_diagonal;
    }
    if (s == "log_cholesky") {
        return Parameterization::log_cholesky;
    }
    throw ArgumentError("unknown parameterization '" + std::string(s) + "'");
}

std::vector<double> to_parameters(const MetricTensor& a, Parameterization p) {
    const Mat3& m = a.matrix();
    if (p == Parameterization::log_diagonal) {
        const Mat3 off = m - Mat3(m.diagonal().asDiagonal());
        if (off.cwiseAbs().maxCoeff() > 1e-12 * m.diagonal().maxCoeff()) {
            throw ArgumentError("log_diagonal parameterization needs a diagonal metric");
        }
        return {std::log(m(0, 0)), std::log(m(1, 1)), std::log(m(2, 2))};
    }
    const Mat3& l = a.cholesky_lower();
    return {std::log(l(0, 0)), l(1, 0), std::log(l(1, 1)), l(2, 0), l(2, 1), std::log(l(2, 2))};
}

MetricTensor from_parameters(std::span<const double> theta, Parameterization p) {
    if (p == Parameterization::log_diagonal) {
        if (theta.size() != 3) {
            throw ArgumentError("log_diagonal takes 3 parameters");
        }
        return MetricTensor::diagonal(std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2]));
    }
    if (theta.size() != 6) {
        throw ArgumentError("log_cholesky takes 6 parameters");
    }
    Mat3 l = Mat3::Zero();
    l(0, 0) = std::exp(theta[0]);
    l(1, 0) = theta[1];
    l(1, 1) = std::exp(theta[2]);
    l(2, 0) = theta[3];
    l(2, 1) = theta[4];
    l(2, 2) = std::exp(theta[5]);
    const Mat3 a = l * l.transpose();
    return MetricTensor(0.5 * (a + a.transpose()));
}

ObservationSet sample_observations(const MetricTensor& a_true, int n, double T, int k, std::uint64_t seed,
                                   Scheme scheme, unsigned workers) {
    if (n < 0) {
        throw ArgumentError("number of observations must be nonnegative");
    }
    IntegratorConfig cfg;
    cfg.scheme = scheme;
    cfg.seed = seed;
    ObservationSet obs;
    obs.endpoints = sample_brownian_endpoints(a_true, T, k, cfg, static_cast<std::size_t>(n), workers);
    obs.T = T;
    obs.gen_seed = seed;
    obs.true_metric = a_true;
    return obs;
}

LikelihoodResult evaluate_log_likelihood(const MetricTensor& a, const ObservationSet& obs, const MleConfig& cfg,
                                         std::uint64_t seed) {
    const std::size_t n = obs.endpoints.size();
    LikelihoodResult out;
    out.per_observation.assign(n, std::numeric_limits<double>::quiet_NaN());
    parallel_for(n, cfg.workers, [&](std::size_t i) {
        IntegratorConfig ic;
        ic.scheme = cfg.scheme;
        ic.seed = substream_seed(seed, i);
        try {
            const auto report = estimate_heat_kernel(obs.endpoints[i], a, obs.T, cfg.steps, cfg.bridges_per_obs, ic,
                                                     cfg.formula, cfg.q_convention, 1);
            out.per_observation[i] = report.log_p_hat;
        } catch (const DegenerateWeights&) {
        } catch (const CutLocusError&) {
        }
    });
    for (double lp : out.per_observation) {
        if (std::isnan(lp)) {
            ++out.skipped;
        } else {
            out.value += lp;
        }
    }
    return out;
}

double log_likelihood(const MetricTensor& a, const ObservationSet& obs, const MleConfig& cfg, std::uint64_t seed) {
    return evaluate_log_likelihood(a, obs, cfg, seed).value;
}

std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> theta, double step) {
    if (!(step > 0.0)) {
        throw ArgumentError("finite-difference step must be positive");
    }
    std::vector<double> x(theta.begin(), theta.end());
    std::vector<double> grad(x.size());
    for (std::size_t p = 0; p < x.size(); ++p) {
        const double keep = x[p];
        x[p] = keep + step;
        const double up = f(x);
        x[p] = keep - step;
        const double down = f(x);
        x[p] = keep;
        grad[p] = (up - down) / (2.0 * step);
    }
    return grad;
}

namespace {

// Noise seed for the e-th likelihood evaluation of a gradient.
std::uint64_t evaluation_seed(const MleConfig& cfg, std::uint64_t seed, std::uint64_t e) {
    return cfg.crn ? seed : substream_seed(seed ^ 0xA5A5A5A5A5A5A5A5ULL, e);
}

}  // namespace

std::vector<std::vector<double>> fd_scores(const MetricTensor& a, const ObservationSet& obs, const MleConfig& cfg,
                                           std::uint64_t seed) {
    if (!(cfg.fd_step > 0.0)) {
        throw ArgumentError("fd_step must be positive");
    }
    std::vector<double> theta = to_parameters(a, cfg.param);
    const std::size_t n = obs.endpoints.size();
    std::vector<std::vector<double>> scores(n, std::vector<double>(theta.size(), 0.0));
    std::uint64_t e = 0;
    for (std::size_t p = 0; p < theta.size(); ++p) {
        const double keep = theta[p];
        theta[p] = keep + cfg.fd_step;
        const auto up = evaluate_log_likelihood(from_parameters(theta, cfg.param), obs, cfg, evaluation_seed(cfg, seed, e++));
        theta[p] = keep - cfg.fd_step;
        const auto down =
            evaluate_log_likelihood(from_parameters(theta, cfg.param), obs, cfg, evaluation_seed(cfg, seed, e++));
        theta[p] = keep;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = up.per_observation[i] - down.per_observation[i];
            // An observation skipped on either side contributes nothing.
            scores[i][p] = std::isnan(d) ? 0.0 : d / (2.0 * cfg.fd_step);
        }
    }
    return scores;
}

std::vector<double> fd_gradient(const MetricTensor& a, const ObservationSet& obs, const MleConfig& cfg,
                                std::uint64_t seed) {
    const auto scores = fd_scores(a, obs, cfg, seed);
    std::vector<double> grad(to_parameters(a, cfg.param).size(), 0.0);
    for (const auto& s : scores) {
        for (std::size_t p = 0; p < grad.size(); ++p) {
            grad[p] += s[p];
        }
    }
    return grad;
}

MleTrace fit_metric(const ObservationSet& obs, const MetricTensor& init, const MleConfig& cfg, std::uint64_t seed,
                    const std::function<void(const MleIterate&)>& on_iterate) {
    if (!(cfg.lr >= 0.0)) {
        throw ArgumentError("learning rate must be nonnegative");
    }
    if (cfg.iters < 0) {
        throw ArgumentError("iteration budget must be nonnegative");
    }
    std::vector<double> theta = to_parameters(init, cfg.param);
    const double n = std::max<double>(1.0, static_cast<double>(obs.endpoints.size()));
    MleTrace trace;
    for (int it = 0;; ++it) {
        const std::uint64_t iter_seed = cfg.crn ? seed : substream_seed(seed, static_cast<std::uint64_t>(it));
        const MetricTensor a = from_parameters(theta, cfg.param);
        MleIterate rec;
        rec.iter = it;
        rec.metric = a;
        rec.log_likelihood = log_likelihood(a, obs, cfg, iter_seed);
        auto grad = fd_gradient(a, obs, cfg, iter_seed);
        double norm2 = 0.0;
        bool finite = std::isfinite(rec.log_likelihood);
        for (double& g : grad) {
            g /= n;
            norm2 += g * g;
            finite = finite && std::isfinite(g);
        }
        rec.grad_norm = std::sqrt(norm2);
        trace.records.push_back(rec);
        if (on_iterate) {
            on_iterate(rec);
        }
        if (!finite) {
            trace.status = MleStatus::non_finite;
            trace.message = "non-finite log-likelihood or gradient at iteration " + std::to_string(it);
            return trace;
        }
        if (rec.grad_norm < cfg.grad_tol) {
            trace.status = MleStatus::converged;
            return trace;
        }
        if (it == cfg.iters) {
            trace.status = MleStatus::budget_exhausted;
            return trace;
        }
        for (std::size_t p = 0; p < theta.size(); ++p) {
            theta[p] += cfg.lr * grad[p];
        }
    }
}

}  // namespace liebridge
