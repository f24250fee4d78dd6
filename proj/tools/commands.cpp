#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "liebridge/bridge.hpp"
#include "liebridge/density.hpp"
#include "liebridge/errors.hpp"
#include "liebridge/metric_io.hpp"
#include "liebridge/mle.hpp"
#include "liebridge/path_io.hpp"
#include "liebridge/rng.hpp"

#ifndef LIEBRIDGE_VERSION
#define LIEBRIDGE_VERSION "unknown"
#endif

namespace liebridge::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---- config helpers ----

const json& field(const json& cfg, const char* name) {
    if (!cfg.is_object() || !cfg.contains(name)) {
        throw ConfigError(std::string("missing config field '") + name + "'");
    }
    return cfg.at(name);
}

template <class T>
T get(const json& cfg, const char* name) {
    try {
        return field(cfg, name).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field '") + name + "' has the wrong type");
    }
}

template <class T>
T get_or(const json& cfg, const char* name, T fallback) {
    return cfg.contains(name) ? get<T>(cfg, name) : fallback;
}

// Accepts a 3x3 array, {"a": 3x3} or a 3-vector of diagonal entries.
MetricTensor metric_field(const json& cfg, const char* name) {
    const json& j = field(cfg, name);
    try {
        if (j.is_array() && j.size() == 3 && j[0].is_number()) {
            return MetricTensor::diagonal(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
        }
        return metric_from_json(j.is_object() ? j : json{{"a", j}});
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field '") + name + "' is not a metric");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config field '") + name + "': " + e.what());
    }
}

json metric_json(const MetricTensor& a) {
    return metric_to_json(a).at("a");
}

Vec3 vec3_field(const json& cfg, const char* name) {
    const auto v = get<std::vector<double>>(cfg, name);
    if (v.size() != 3) {
        throw ConfigError(std::string("config field '") + name + "' needs 3 entries");
    }
    return Vec3(v[0], v[1], v[2]);
}

int positive_int(const json& cfg, const char* name, int min_value = 1) {
    const int v = get<int>(cfg, name);
    if (v < min_value) {
        throw ConfigError(std::string("config field '") + name + "' must be >= " + std::to_string(min_value));
    }
    return v;
}

double positive_real(const json& cfg, const char* name) {
    const double v = get<double>(cfg, name);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string("config field '") + name + "' must be positive");
    }
    return v;
}

MetricTensor parse_metric_flag(const std::string& s) {
    if (s == "identity") {
        return MetricTensor::identity();
    }
    if (s.rfind("diag:", 0) == 0) {
        std::vector<double> d;
        std::stringstream ss(s.substr(5));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                d.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("bad --metric entry '" + item + "'");
            }
        }
        if (d.size() != 3) {
            throw ConfigError("--metric diag: needs 3 entries");
        }
        return MetricTensor::diagonal(d[0], d[1], d[2]);
    }
    try {
        return load_metric(s);
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse metric file '" + s + "': " + e.what());
    }
}

std::vector<double> parse_triple(const std::string& s, const char* flag) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError(std::string("bad ") + flag + " entry '" + item + "'");
        }
    }
    if (v.size() != 3) {
        throw ConfigError(std::string(flag) + " needs 3 comma-separated numbers");
    }
    return v;
}

std::uint64_t seed_override(std::uint64_t seed) {
    if (const char* env = std::getenv("LIEBRIDGE_SEED"); env && *env) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("LIEBRIDGE_SEED is not an unsigned integer: ") + env);
        }
    }
    return seed;
}

// Target rotation; a target on the cut locus is reported before any sampling.
GroupElement target_field(const json& cfg) {
    const GroupElement v = group_exp(vec3_field(cfg, "target"));
    group_log(v);
    return v;
}

// ---- output helpers ----

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write " + p.string());
    }
    return f;
}

void write_json(const fs::path& p, const json& j) {
    auto f = open_out(p);
    f << j.dump(2) << '\n';
}

std::string indexed(const char* stem, std::size_t i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04zu.%s", stem, i, ext);
    return buf;
}

json rotvec_json(const GroupElement& v) {
    const Vec3 w = group_log(v);
    return json::array({w[0], w[1], w[2]});
}

// ---- commands ----

void sample_bm(const json& cfg, const fs::path& dir, unsigned workers, std::ostream& out) {
    const MetricTensor a = metric_field(cfg, "metric");
    const double T = positive_real(cfg, "T");
    const int k = positive_int(cfg, "steps");
    const int n = positive_int(cfg, "paths");
    IntegratorConfig ic;
    ic.seed = get<std::uint64_t>(cfg, "seed");
    ic.scheme = parse_scheme(get<std::string>(cfg, "scheme"));
    ic.reproject = get<bool>(cfg, "reproject");
    const bool frames = get<bool>(cfg, "frames");

    const auto paths = sample_brownian_paths(a, T, k, ic, static_cast<std::size_t>(n), workers);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        auto f = open_out(dir / indexed("path", i, "csv"));
        write_path_csv(f, paths[i]);
        if (frames) {
            auto g = open_out(dir / indexed("frames", i, "csv"));
            write_frames_csv(g, paths[i]);
        }
    }
    out << "wrote " << paths.size() << " paths to " << dir.string() << '\n';
}

void sample_bridge(const json& cfg, const fs::path& dir, unsigned workers, std::ostream& out) {
    const MetricTensor a = metric_field(cfg, "metric");
    const GroupElement v = target_field(cfg);
    const double T = positive_real(cfg, "T");
    const int k = positive_int(cfg, "steps", 2);
    const int n = positive_int(cfg, "paths");
    const PhiFormula formula = parse_phi_formula(get<std::string>(cfg, "formula"));
    IntegratorConfig ic;
    ic.seed = get<std::uint64_t>(cfg, "seed");
    ic.scheme = parse_scheme(get<std::string>(cfg, "scheme"));

    const auto bridges = sample_guided_bridges(v, a, T, k, ic, static_cast<std::size_t>(n), formula, workers);
    std::vector<double> gaps;
    std::vector<double> log_w;
    int cut_hits = 0;
    for (std::size_t i = 0; i < bridges.size(); ++i) {
        const auto& b = bridges[i];
        auto f = open_out(dir / indexed("bridge", i, "csv"));
        write_bridge_csv(f, b);
        write_json(dir / indexed("bridge", i, "json"), {{"target", rotvec_json(v)},
                                                        {"T", T},
                                                        {"k", k},
                                                        {"seed", b.path.seed},
                                                        {"formula", to_string(formula)},
                                                        {"cut_hits", b.cut_hits},
                                                        {"log_phi", b.log_phi}});
        gaps.push_back(distance(b.path.endpoint(), v, a));
        log_w.push_back(b.log_phi);
        cut_hits += b.cut_hits;
    }
    std::vector<double> sorted = gaps;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    double mean = 0.0;
    for (double g : gaps) {
        mean += g;
    }
    mean /= static_cast<double>(m);
    json summary = {{"n_bridges", n},
                    {"mean_endpoint_distance", mean},
                    {"median_endpoint_distance", median},
                    {"max_endpoint_distance", sorted.back()},
                    {"cut_hits", cut_hits},
                    {"formula", to_string(formula)}};
    if (log_w.size() >= 2) {
        summary["ess"] = summarize_log_weights(log_w).ess;
    }
    write_json(dir / "summary.json", summary);
    out << summary.dump(2) << '\n';
}

json report_json(const EstimatorReport& r) {
    return {{"p_hat", r.p_hat},
            {"log_p_hat", r.log_p_hat},
            {"stderr", r.std_error},
            {"ess", r.ess},
            {"n_bridges", r.n_bridges},
            {"cut_hits", r.cut_hits},
            {"formula", to_string(r.formula)},
            {"q_convention", to_string(r.q_convention)}};
}

void estimate_density(const json& cfg, const fs::path& dir, unsigned workers, std::ostream& out) {
    const MetricTensor a = metric_field(cfg, "metric");
    const GroupElement v = target_field(cfg);
    const double T = positive_real(cfg, "T");
    const int k = positive_int(cfg, "steps", 2);
    const int n = positive_int(cfg, "bridges", 2);
    IntegratorConfig ic;
    ic.seed = get<std::uint64_t>(cfg, "seed");
    ic.scheme = parse_scheme(get<std::string>(cfg, "scheme"));
    const auto report = estimate_heat_kernel(v, a, T, k, n, ic, parse_phi_formula(get<std::string>(cfg, "formula")),
                                             parse_q_convention(get<std::string>(cfg, "q_convention")), workers);
    const json j = report_json(report);
    write_json(dir / "report.json", j);
    auto f = open_out(dir / "weights.csv");
    f << "bridge,log_weight\n";
    for (std::size_t i = 0; i < report.log_weights.size(); ++i) {
        f << i << ',' << format_number(report.log_weights[i]) << '\n';
    }
    out << j.dump(2) << '\n';
}

void fit(const json& cfg, const fs::path& dir, unsigned workers, std::ostream& out) {
    const MetricTensor truth = metric_field(cfg, "true_metric");
    const MetricTensor init = metric_field(cfg, "init_metric");
    const int n_obs = positive_int(cfg, "n_obs", 0);
    const double T = positive_real(cfg, "T");
    MleConfig mc;
    mc.steps = positive_int(cfg, "steps", 2);
    mc.bridges_per_obs = positive_int(cfg, "bridges_per_obs", 2);
    mc.lr = get<double>(cfg, "lr");
    mc.iters = positive_int(cfg, "iters", 0);
    mc.fd_step = positive_real(cfg, "fd_step");
    mc.grad_tol = get<double>(cfg, "grad_tol");
    mc.crn = get<bool>(cfg, "crn");
    mc.param = parse_parameterization(get<std::string>(cfg, "param"));
    mc.formula = parse_phi_formula(get<std::string>(cfg, "formula"));
    mc.q_convention = parse_q_convention(get<std::string>(cfg, "q_convention"));
    mc.scheme = parse_scheme(get<std::string>(cfg, "scheme"));
    mc.workers = workers;
    const auto seed = get<std::uint64_t>(cfg, "seed");
    const int obs_steps = positive_int(cfg, "obs_steps");

    // Observations and bridge noise come from separate substreams of one seed.
    const auto obs = sample_observations(truth, n_obs, T, obs_steps, substream_seed(seed, 0), mc.scheme, workers);
    auto trace_file = open_out(dir / "trace.csv");
    trace_file << "iter,a11,a22,a33,loglik,gradnorm\n";
    const auto trace = fit_metric(obs, init, mc, substream_seed(seed, 1), [&](const MleIterate& r) {
        const Mat3& m = r.metric.matrix();
        trace_file << r.iter << ',' << format_number(m(0, 0)) << ',' << format_number(m(1, 1)) << ','
                   << format_number(m(2, 2)) << ',' << format_number(r.log_likelihood) << ','
                   << format_number(r.grad_norm) << '\n';
        trace_file.flush();
    });
    const char* status = trace.status == MleStatus::converged          ? "converged"
                         : trace.status == MleStatus::budget_exhausted ? "budget_exhausted"
                                                                       : "non_finite";
    json result = {{"a", metric_json(trace.final_metric())},
                   {"status", status},
                   {"iterations", trace.records.size() - 1},
                   {"log_likelihood", trace.records.back().log_likelihood}};
    write_json(dir / "final_metric.json", result);
    out << result.dump(2) << '\n';
    if (trace.status == MleStatus::non_finite) {
        throw NonFiniteLikelihood(trace.message);
    }
}

using Runner = void (*)(const json&, const fs::path&, unsigned, std::ostream&);

Runner runner_for(const std::string& command) {
    if (command == "sample-bm") {
        return sample_bm;
    }
    if (command == "sample-bridge") {
        return sample_bridge;
    }
    if (command == "estimate-density") {
        return estimate_density;
    }
    if (command == "fit-metric") {
        return fit;
    }
    throw ConfigError("unknown command '" + command + "'");
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config, double wall) {
    write_json(dir / "manifest.json", {{"command", command},
                                       {"config", config},
                                       {"seed", config.at("seed")},
                                       {"version", LIEBRIDGE_VERSION},
                                       {"wall_time", wall}});
}

}  // namespace

json normalize_experiment(const json& e) {
    for (const char* name : {"true_metric", "n_obs", "T", "steps", "bridges_per_obs", "lr", "iters", "init_metric",
                             "seed"}) {
        field(e, name);
    }
    json c = e;
    c["true_metric"] = metric_json(metric_field(e, "true_metric"));
    c["init_metric"] = metric_json(metric_field(e, "init_metric"));
    const MleConfig defaults;
    c["formula"] = get_or<std::string>(e, "formula", to_string(defaults.formula));
    c["q_convention"] = get_or<std::string>(e, "q_convention", to_string(defaults.q_convention));
    c["fd_step"] = get_or<double>(e, "fd_step", defaults.fd_step);
    c["grad_tol"] = get_or<double>(e, "grad_tol", defaults.grad_tol);
    c["crn"] = get_or<bool>(e, "crn", defaults.crn);
    c["param"] = get_or<std::string>(e, "param", to_string(defaults.param));
    c["scheme"] = get_or<std::string>(e, "scheme", to_string(defaults.scheme));
    c["obs_steps"] = get_or<int>(e, "obs_steps", get<int>(e, "steps"));
    if (get<double>(c, "lr") < 0.0) {
        throw ConfigError("config field 'lr' must be nonnegative");
    }
    return c;
}

void execute(const std::string& command, const json& config, const std::string& out_dir, unsigned workers,
             std::ostream& out) {
    const Runner runner = runner_for(command);
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    const auto start = std::chrono::steady_clock::now();
    const auto wall = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    try {
        runner(config, dir, workers, out);
    } catch (const NonFiniteLikelihood&) {
        write_manifest(dir, command, config, wall());
        throw;
    }
    write_manifest(dir, command, config, wall());
}

void replay(const std::string& manifest_path, const std::string& out_dir, unsigned workers, std::ostream& out) {
    std::ifstream f(manifest_path);
    if (!f) {
        throw ConfigError("cannot read manifest " + manifest_path);
    }
    json m;
    try {
        m = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError("manifest " + manifest_path + " is not JSON: " + e.what());
    }
    const auto dir = out_dir.empty() ? fs::path(manifest_path).parent_path().string() : out_dir;
    execute(get<std::string>(m, "command"), field(m, "config"), dir, workers, out);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Brownian motion, guided bridges and metric estimation on SO(3)", "liebridge"};
    app.require_subcommand(1);
    app.set_version_flag("--version", LIEBRIDGE_VERSION);

    struct Common {
        std::string metric = "identity";
        double T = 1.0;
        int steps = 0;
        std::uint64_t seed = 0;
        std::string scheme = "euler_heun";
        std::string out;
        unsigned workers = 0;
    };
    const auto add_common = [](CLI::App* sub, Common& c) {
        sub->add_option("--metric", c.metric, "identity, diag:a,b,c or a JSON metric file")->capture_default_str();
        sub->add_option("--T", c.T, "time horizon")->capture_default_str();
        sub->add_option("--steps", c.steps, "time steps")->capture_default_str();
        sub->add_option("--seed", c.seed, "master seed (LIEBRIDGE_SEED overrides)")->capture_default_str();
        sub->add_option("--scheme", c.scheme, "euler_heun or lie_exponential")->capture_default_str();
        sub->add_option("--out", c.out, "output directory")->capture_default_str();
        sub->add_option("--workers", c.workers, "worker threads, 0 for all cores")->capture_default_str();
    };

    Common bm_opts{.steps = 20, .out = "liebridge-out/sample-bm"};
    int bm_paths = 1;
    bool frames = false;
    bool no_reproject = false;
    auto* bm = app.add_subcommand("sample-bm", "sample Brownian paths");
    add_common(bm, bm_opts);
    bm->add_option("--paths", bm_paths, "number of paths")->capture_default_str();
    bm->add_flag("--frames", frames, "also write the rotated basis vectors");
    bm->add_flag("--no-reproject", no_reproject, "skip projection onto SO(3) after each step");

    Common br_opts{.steps = 100, .out = "liebridge-out/sample-bridge"};
    int br_paths = 256;
    std::string br_target = "0,0,1";
    std::string br_formula = "derived";
    auto* br = app.add_subcommand("sample-bridge", "sample guided bridges toward a target");
    add_common(br, br_opts);
    br->add_option("--paths", br_paths, "number of bridges")->capture_default_str();
    br->add_option("--target-axis-angle", br_target, "rotation vector x,y,z of the target")->capture_default_str();
    br->add_option("--formula", br_formula, "derived or paper_verbatim")->capture_default_str();

    Common ed_opts{.T = 0.3, .steps = 50, .out = "liebridge-out/estimate-density"};
    int bridges = 4096;
    std::string ed_target = "0,0,0";
    std::string ed_formula = "derived";
    std::string q_convention = "euclidean_consistent";
    std::string weights_csv;
    auto* ed = app.add_subcommand("estimate-density", "importance-sampled heat kernel at a target");
    add_common(ed, ed_opts);
    ed->add_option("--bridges", bridges, "number of bridges")->capture_default_str();
    ed->add_option("--target-axis-angle", ed_target, "rotation vector x,y,z of the target")->capture_default_str();
    ed->add_option("--formula", ed_formula, "derived or paper_verbatim")->capture_default_str();
    ed->add_option("--q-convention", q_convention, "euclidean_consistent or paper_verbatim")->capture_default_str();
    ed->add_option("--weights-csv", weights_csv, "also copy per-bridge log-weights to this file");

    std::string config_path;
    std::string fm_out = "liebridge-out/fit-metric";
    unsigned fm_workers = 0;
    auto* fm = app.add_subcommand("fit-metric", "metric recovery experiment");
    fm->add_option("--config", config_path, "experiment JSON")->required();
    fm->add_option("--out", fm_out, "output directory")->capture_default_str();
    fm->add_option("--workers", fm_workers, "worker threads, 0 for all cores")->capture_default_str();

    std::string manifest_path;
    std::string rp_out;
    unsigned rp_workers = 0;
    auto* rp = app.add_subcommand("replay", "re-run a command from its manifest");
    rp->add_option("manifest", manifest_path, "manifest.json")->required();
    rp->add_option("--out", rp_out, "output directory (default: next to the manifest)");
    rp->add_option("--workers", rp_workers, "worker threads, 0 for all cores")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalidConfig;
    }

    try {
        const auto base = [](const Common& c) {
            return json{{"metric", metric_json(parse_metric_flag(c.metric))},
                        {"T", c.T},
                        {"steps", c.steps},
                        {"seed", seed_override(c.seed)},
                        {"scheme", c.scheme}};
        };
        if (*bm) {
            json c = base(bm_opts);
            c["paths"] = bm_paths;
            c["frames"] = frames;
            c["reproject"] = !no_reproject;
            execute("sample-bm", c, bm_opts.out, bm_opts.workers, out);
        } else if (*br) {
            json c = base(br_opts);
            c["target"] = parse_triple(br_target, "--target-axis-angle");
            c["paths"] = br_paths;
            c["formula"] = br_formula;
            execute("sample-bridge", c, br_opts.out, br_opts.workers, out);
        } else if (*ed) {
            json c = base(ed_opts);
            c["target"] = parse_triple(ed_target, "--target-axis-angle");
            c["bridges"] = bridges;
            c["formula"] = ed_formula;
            c["q_convention"] = q_convention;
            execute("estimate-density", c, ed_opts.out, ed_opts.workers, out);
            if (!weights_csv.empty()) {
                fs::copy_file(fs::path(ed_opts.out) / "weights.csv", weights_csv,
                              fs::copy_options::overwrite_existing);
            }
        } else if (*fm) {
            std::ifstream f(config_path);
            if (!f) {
                throw ConfigError("cannot read config " + config_path);
            }
            json e;
            try {
                e = json::parse(f);
            } catch (const json::exception& ex) {
                throw ConfigError("config " + config_path + " is not JSON: " + ex.what());
            }
            json c = normalize_experiment(e);
            c["seed"] = seed_override(get<std::uint64_t>(c, "seed"));
            execute("fit-metric", c, fm_out, fm_workers, out);
        } else {
            replay(manifest_path, rp_out, rp_workers, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const CutLocusError& e) {
        err << "error: target on the cut locus: " << e.what() << '\n';
        return kCutLocus;
    } catch (const DegenerateWeights& e) {
        err << "error: " << e.what() << '\n';
        return kDegenerateWeights;
    } catch (const std::invalid_argument& e) {
        // ArgumentError, NotSPDError
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const HorizonError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const NonFiniteLikelihood& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kOk;
}

}  // namespace liebridge::cli
