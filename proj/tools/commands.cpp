#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbm/cascade.hpp"
#include "fbm/distribution.hpp"
#include "fbm/gibbs.hpp"
#include "fbm/loadshare.hpp"
#include "fbm/parallel.hpp"
#include "fbm/rng.hpp"
#include "fbm/stats.hpp"
#include "fbm/threshold.hpp"

#ifndef FBM_VERSION
#define FBM_VERSION "unknown"
#endif

namespace fbm::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

unsigned RunConfig::resolved_workers() const { return workers == 0 ? default_workers() : workers; }

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

json config_json(const RunConfig &c) {
    json j;
    j["command"] = c.command;
    j["rows"] = c.rows;
    j["cols"] = c.cols;
    j["family"] = c.family;
    j["shape"] = c.shape;
    j["scale"] = c.scale;
    j["rule"] = c.rule;
    j["structure"] = c.structure;
    j["replicas"] = c.replicas;
    j["seed"] = c.seed;
    j["chain"] = c.chain;
    j["tail_lo"] = c.tail_lo;
    j["tail_hi"] = c.tail_hi;
    j["ref_percentile"] = c.ref_percentile;
    j["percentiles"] = c.percentiles;
    j["a"] = c.a;
    j["s_star"] = c.s_star;
    j["out"] = c.out;
    j["workers"] = c.resolved_workers();
    j["samples"] = c.samples;
    j["input"] = c.input;
    j["kind"] = c.kind;
    j["m"] = c.m;
    j["k"] = c.k;
    j["l"] = c.l;
    j["n"] = c.n;
    j["x"] = c.x;
    j["y"] = c.y;
    j["from"] = c.from;
    j["to"] = c.to;
    j["step"] = c.step;
    j["pattern"] = c.pattern;
    return j;
}

class Output {
  public:
    explicit Output(const RunConfig &config) : config_(config), dir_(config.out) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    void write(const std::string &name, const std::string &text) {
        const fs::path p = dir_ / name;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw IoError("cannot open '" + p.string() + "' for writing");
        f << text;
        f.close();
        if (!f) throw IoError("failed writing '" + p.string() + "'");
        files_.push_back(name);
    }

    void write_json(const std::string &name, const json &j) { write(name, j.dump(2) + "\n"); }

    ~Output() {
        // The manifest records whatever was written, also on failure paths.
        try {
            json m;
            m["version"] = FBM_VERSION;
            m["config"] = config_json(config_);
            m["outputs"] = files_;
            std::ofstream f(dir_ / "manifest.json", std::ios::binary);
            f << m.dump(2) << "\n";
        } catch (...) {
        }
    }

  private:
    const RunConfig &config_;
    fs::path dir_;
    std::vector<std::string> files_;
};

struct Model {
    ComponentGraph graph;
    std::unique_ptr<LoadShareRule> rule;
    StructureFunction structure;
    StrengthDistribution dist;
};

StrengthDistribution make_distribution(const RunConfig &c) {
    try {
        return StrengthDistribution::make(parse_family(c.family), c.shape, c.scale);
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
}

Model make_model(const RunConfig &c, bool tabulate) {
    try {
        ComponentGraph g = build_grid_graph(c.rows, c.cols);
        std::unique_ptr<LoadShareRule> rule = make_rule(c.rule, g, !tabulate);
        StructureFunction s = StructureFunction::parse(c.structure, c.rows, c.cols);
        StrengthDistribution d = make_distribution(c);
        if (tabulate && rule->size() <= 16)
            rule = std::make_unique<LoadShareTable>(LoadShareTable::tabulate(*rule, c.resolved_workers()));
        return {std::move(g), std::move(rule), std::move(s), std::move(d)};
    } catch (const UsageError &) {
        throw;
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
}

double component_shape(const RunConfig &c) { return c.family == "weibull" ? c.shape : 1.0; }

std::string column(const std::string &header, std::span<const double> v) {
    std::string s = header + "\n";
    s.reserve(v.size() * 20 + s.size());
    for (double x : v) {
        s += format_double(x);
        s += '\n';
    }
    return s;
}

// Indices 0..N-1 of the sorted sample kept in the plot: all of the first
// 1000, then about 1000 more spaced geometrically.
std::vector<std::size_t> plot_indices(std::size_t n) {
    std::vector<std::size_t> idx;
    const std::size_t dense = std::min<std::size_t>(n, 1000);
    for (std::size_t i = 0; i < dense; ++i) idx.push_back(i);
    if (n <= dense) return idx;
    const double ratio = std::pow(static_cast<double>(n) / dense, 1.0 / 1000.0);
    double t = dense;
    while (true) {
        t *= ratio;
        const auto i = std::min(n - 1, static_cast<std::size_t>(t));
        if (i > idx.back()) idx.push_back(i);
        if (i >= n - 1) break;
    }
    return idx;
}

std::string weibull_plot_csv(std::span<const double> samples) {
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    std::vector<double> xs, sf;
    for (std::size_t i : plot_indices(v.size())) {
        xs.push_back(v[i]);
        sf.push_back(1.0 - (i + 1) / n);
    }
    const WeibullPlot plot = weibull_plot_points(xs, sf);
    std::string s = "ln_x,ln_neg_ln_sf\n";
    for (std::size_t i = 0; i < plot.ln_x.size(); ++i)
        s += format_double(plot.ln_x[i]) + "," + format_double(plot.ln_neg_ln_sf[i]) + "\n";
    return s;
}

json tail_json(const TailFit &f, double shape) {
    json j;
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    j["stderr"] = f.stderr_slope;
    j["points"] = f.points;
    j["window"] = {f.lo, f.hi};
    j["component_shape"] = shape;
    j["inflation_factor"] = inflation_factor(f.slope, shape);
    return j;
}

std::vector<double> read_samples_file(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read samples file '" + path + "'");
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string field = line.substr(0, line.find(','));
        double v = 0.0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
        if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
            if (lineno == 1) continue; // header
            throw IoError(path + ":" + std::to_string(lineno) + ": not a number: '" + field + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw IoError("samples file '" + path + "' holds no values");
    return out;
}

std::vector<CensoredSample> read_censored_file(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read data file '" + path + "'");
    std::vector<CensoredSample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::string a = line.substr(0, comma);
        const std::string b = comma == std::string::npos ? "0" : line.substr(comma + 1);
        double v = 0.0;
        const auto ra = std::from_chars(a.data(), a.data() + a.size(), v);
        const bool num = ra.ec == std::errc() && ra.ptr == a.data() + a.size();
        if (!num && lineno == 1) continue; // header
        if (!num || !(v > 0.0) || !std::isfinite(v))
            throw IoError(path + ":" + std::to_string(lineno) + ": value must be a positive number, got '" + a + "'");
        if (b != "0" && b != "1")
            throw IoError(path + ":" + std::to_string(lineno) + ": censored flag must be 0 or 1, got '" + b + "'");
        out.push_back({v, b == "1"});
    }
    if (out.empty()) throw IoError("data file '" + path + "' holds no observations");
    return out;
}

std::string potentials_csv(const GibbsModel &m) {
    std::string s = "subset_mask,subset_size,V,U\n";
    for (std::size_t a = 0; a < m.potentials.size(); ++a)
        s += std::to_string(a) + "," + std::to_string(cardinality(a)) + "," + format_double(m.potentials[a]) + "," +
             format_double(m.energy[a]) + "\n";
    return s;
}

std::vector<double> grid(const RunConfig &c) {
    if (!(c.step > 0.0) || !(c.to >= c.from)) throw UsageError("density grid needs step > 0 and to >= from");
    std::vector<double> g;
    const auto count = static_cast<std::size_t>(std::floor((c.to - c.from) / c.step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) g.push_back(c.from + i * c.step);
    return g;
}

} // namespace

void validate(const RunConfig &c) {
    const std::string &cmd = c.command;
    if (c.rows < 1 || c.cols < 1) throw UsageError("rows and cols must be positive");
    if (c.replicas < 1) throw UsageError("replicas must be at least 1");
    if (c.chain < 1) throw UsageError("chain length must be at least 1");
    if (!(c.tail_lo > 0.0 && c.tail_hi > c.tail_lo && c.tail_hi < 1.0))
        throw UsageError("tail window needs 0 < tail-lo < tail-hi < 1");
    if (cmd == "cycles") {
        if (!(c.a > 0.0 && c.a < 1.0))
            throw UsageError("degradation factor a must lie in (0, 1): otherwise the bundle fails in the first cycle "
                             "or never fails");
        if (!(c.s_star > 0.0)) throw UsageError("s-star must be positive");
    }
    if (cmd == "gibbs") {
        if (c.percentiles.empty()) throw UsageError("gibbs needs at least one --percentiles value");
        for (double p : c.percentiles)
            if (!(p > 0.0 && p < 100.0)) throw UsageError("percentiles must lie in (0, 100)");
        if (!(c.ref_percentile > 0.0 && c.ref_percentile < 100.0))
            throw UsageError("ref-percentile must lie in (0, 100)");
        if (c.rows * c.cols > kMaxGibbsComponents)
            throw UsageError("gibbs enumerates all 2^n configurations and is limited to n <= 20 components");
    }
    if (cmd == "analyze" && c.input.empty()) throw UsageError("analyze needs --input");
    if (cmd == "density") {
        static const std::vector<std::string> kinds{"irwin-hall", "mixing", "order-stat-joint", "tilted", "pattern"};
        if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
            throw UsageError("unknown density kind '" + c.kind +
                             "'; expected irwin-hall, mixing, order-stat-joint, tilted or pattern");
    }
}

void cmd_simulate(const RunConfig &c) {
    validate(c);
    Model m = make_model(c, true);
    const unsigned workers = c.resolved_workers();
    Output out(c);
    const std::vector<double> samples = sample_bundle_strengths(m.dist, *m.rule, m.structure, c.replicas, c.seed, workers);
    out.write("samples.csv", column("strength", samples));

    const double shape = component_shape(c);
    json fit;
    fit["replicas"] = c.replicas;
    fit["smallest_cut"] = m.structure.smallest_cut_size();
    fit["bundle"] = tail_json(lower_tail_slope(samples, c.tail_lo, c.tail_hi), shape);
    if (c.chain > 1) {
        const std::vector<double> chain = chain_strength(samples, {c.chain}, c.replicas, c.seed + 1);
        out.write("chain_samples.csv", column("strength", chain));
        out.write("weibull_plot.csv", weibull_plot_csv(chain));
        json cj = tail_json(lower_tail_slope(chain, c.tail_lo, c.tail_hi), shape);
        std::vector<CensoredSample> cs;
        cs.reserve(chain.size());
        for (double v : chain) cs.push_back({v, false});
        const WeibullFit w = weibull_mle_censored(cs);
        cj["length"] = c.chain;
        cj["mle_shape"] = w.rho;
        cj["mle_scale"] = w.sigma;
        fit["chain"] = cj;
    } else {
        out.write("weibull_plot.csv", weibull_plot_csv(samples));
    }
    out.write_json("tail_fit.json", fit);
}

void cmd_gibbs(const RunConfig &c) {
    validate(c);
    Model m = make_model(c, true);
    const unsigned workers = c.resolved_workers();
    Output out(c);
    const std::vector<double> samples =
        c.samples.empty() ? sample_bundle_strengths(m.dist, *m.rule, m.structure, c.replicas, c.seed, workers)
                          : read_samples_file(c.samples);
    const double s_ref = strength_percentile(samples, c.ref_percentile);
    const GibbsModel ref = build_gibbs(s_ref, *m.rule, m.dist, workers);
    out.write("potentials.csv", potentials_csv(ref));
    json records = json::array();
    for (double p : c.percentiles) {
        const double s = strength_percentile(samples, p);
        const GibbsModel target = build_gibbs(s, *m.rule, m.dist, workers);
        out.write("potentials_" + format_double(p) + ".csv", potentials_csv(target));
        const LMFFit f = lmf_fit(ref, target, c.ref_percentile, p);
        json r;
        r["p"] = f.p;
        r["p_prime"] = f.p_prime;
        r["s_p"] = s_ref;
        r["s_p_prime"] = s;
        r["slope"] = f.slope;
        r["intercept"] = f.intercept;
        r["r2"] = f.r2;
        r["tv_error"] = f.tv_error;
        r["tv_error_median"] = f.tv_error_median;
        r["median_potentials"] = f.median_potentials;
        records.push_back(r);
    }
    out.write_json("lmf.json", records);
}

void cmd_analyze(const RunConfig &c) {
    validate(c);
    const std::vector<CensoredSample> data = read_censored_file(c.input);
    Output out(c);
    const KMCurve km = kaplan_meier(data);
    if (km.all_censored) std::cerr << "warning: every observation is censored; the KM curve is constant at 1\n";
    std::string s = "time,surv,lo,hi\n0,1,1,1\n";
    for (std::size_t i = 0; i < km.times.size(); ++i)
        s += format_double(km.times[i]) + "," + format_double(km.survival[i]) + "," + format_double(km.lower[i]) + "," +
             format_double(km.upper[i]) + "\n";
    out.write("km.csv", s);

    json j;
    std::size_t events = 0;
    for (const auto &o : data) events += o.censored ? 0 : 1;
    j["n"] = data.size();
    j["events"] = events;
    bool failed = false;
    try {
        const WeibullFit f = weibull_mle_censored(data);
        j["rho"] = f.rho;
        j["sigma"] = f.sigma;
        j["loglik"] = f.loglik;
        j["converged"] = f.converged;
        j["iterations"] = f.iterations;
        if (!f.converged) {
            j["diagnostics"] = f.diagnostics;
            failed = true;
        }
    } catch (const std::invalid_argument &e) {
        std::cerr << "warning: no Weibull fit: " << e.what() << "\n";
        j["converged"] = false;
        j["error"] = e.what();
    }
    out.write_json("weibull_fit.json", j);
    if (failed) throw std::runtime_error("Weibull maximum likelihood did not converge: " + j["diagnostics"].get<std::string>());
}

void cmd_cycles(const RunConfig &c) {
    validate(c);
    Model m = make_model(c, true);
    Output out(c);
    const int n = m.rule->size();
    std::vector<double> cycles(c.replicas);
    const std::uint64_t blocks = (c.replicas + kReplicaBlock - 1) / kReplicaBlock;
    parallel_for_blocks(blocks, c.resolved_workers(), [&](std::size_t b) {
        Rng rng = block_rng(c.seed, b);
        std::vector<double> x(n);
        const std::uint64_t end = std::min<std::uint64_t>(c.replicas, (b + 1) * kReplicaBlock);
        for (std::uint64_t r = b * kReplicaBlock; r < end; ++r) {
            for (int i = 0; i < n; ++i) x[i] = m.dist.sample(i, rng);
            cycles[r] = static_cast<double>(cycles_to_failure(x, *m.rule, m.structure, c.s_star, c.a));
        }
    });
    std::string s = "replica,cycles\n";
    for (std::size_t r = 0; r < cycles.size(); ++r) s += std::to_string(r) + "," + format_double(cycles[r]) + "\n";
    out.write("cycles.csv", s);

    json j;
    j["replicas"] = c.replicas;
    j["min"] = *std::min_element(cycles.begin(), cycles.end());
    j["max"] = *std::max_element(cycles.begin(), cycles.end());
    double mean = 0.0;
    for (double v : cycles) mean += v;
    j["mean"] = mean / cycles.size();
    for (double p : {10.0, 25.0, 50.0, 75.0, 90.0}) j["p" + format_double(p)] = strength_percentile(cycles, p);
    out.write_json("cycles_summary.json", j);
}

void cmd_density(const RunConfig &c) {
    validate(c);
    Output out(c);
    json meta;
    meta["kind"] = c.kind;
    std::string s;
    try {
        if (c.kind == "irwin-hall") {
            s = "t,density\n";
            for (double t : grid(c)) s += format_double(t) + "," + format_double(irwin_hall_pdf(c.m, t)) + "\n";
            meta["m"] = c.m;
        } else if (c.kind == "mixing") {
            const MixingDensity a = c.l > 0 ? spacing_mixing(c.k, c.l, c.n) : order_stat_mixing(c.k, c.n);
            meta["k"] = c.k;
            meta["l"] = c.l;
            meta["n"] = c.n;
            meta["lower"] = a.lower();
            meta["upper"] = a.upper();
            meta["point_mass"] = a.is_point_mass();
            meta["normalizer"] = a.normalizer();
            meta["mean"] = a.expect([](double t) { return t; });
            s = "theta,density\n";
            if (!a.is_point_mass()) {
                const double h = (a.upper() - a.lower()) / 100.0;
                for (int i = 0; i <= 100; ++i) {
                    const double t = a.lower() + i * h;
                    s += format_double(t) + "," + format_double(a.pdf(t)) + "\n";
                }
            }
        } else if (c.kind == "order-stat-joint") {
            if (c.l <= c.k) throw UsageError("order-stat-joint needs --l > --k");
            s = "x,y,direct,mixture,relative_gap\n";
            double worst = 0.0;
            const auto g = grid(c);
            for (double x : g)
                for (double y : g) {
                    if (!(x > 0.0 && y > x)) continue;
                    const JointDensityPaths d = order_stat_joint_density(c.k, c.l, c.n, x, y);
                    worst = std::max(worst, d.relative_gap());
                    s += format_double(x) + "," + format_double(y) + "," + format_double(d.direct) + "," +
                         format_double(d.mixture) + "," + format_double(d.relative_gap()) + "\n";
                }
            meta["max_relative_gap"] = worst;
        } else if (c.kind == "tilted") {
            if (c.l <= c.k) throw UsageError("tilted needs --l > --k");
            const TiltedConditional t = tilted_conditional(c.k, c.l, c.n, c.x, c.y);
            s = "variable,theta,density\n";
            auto emit = [&](const char *name, const MixingDensity &a) {
                if (a.is_point_mass()) {
                    meta[std::string(name) + "_atom"] = a.atom();
                    return;
                }
                const double h = (a.upper() - a.lower()) / 100.0;
                for (int i = 0; i <= 100; ++i) {
                    const double th = a.lower() + i * h;
                    s += std::string(name) + "," + format_double(th) + "," + format_double(a.pdf(th)) + "\n";
                }
            };
            emit("theta1", t.theta1);
            emit("theta2", t.theta2);
            meta["x"] = c.x;
            meta["y"] = c.y;
        } else {
            if (c.pattern.empty()) throw UsageError("pattern density needs --pattern");
            Model m = make_model(c, false);
            const BreakingPattern p = BreakingPattern::parse(c.pattern);
            const PatternBounds b = pattern_bounds(p, *m.rule);
            s = "s,cumulative\n";
            for (double x : grid(c)) {
                std::vector<StressBox> boxes(b.cycles.size(), StressBox{0.0, x});
                s += format_double(x) + "," + format_double(pattern_probability(b, m.dist, boxes)) + "\n";
            }
            meta["pattern"] = p.to_string();
            meta["probability"] = pattern_probability(b, m.dist);
        }
    } catch (const UsageError &) {
        throw;
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    out.write("density.csv", s);
    out.write_json("density.json", meta);
}

int run(int argc, const char *const *argv) {
    RunConfig c;
    CLI::App app{"Fiber bundle simulation, Gibbs measures and strength statistics"};
    app.set_version_flag("--version", std::string(FBM_VERSION));
    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
    app.require_subcommand(1);

    app.add_option("--rows", c.rows, "grid rows (segments along a fiber)")->capture_default_str();
    app.add_option("--cols", c.cols, "grid columns (fibers)")->capture_default_str();
    app.add_option("--family", c.family, "component law: weibull, exponential, uniform")->capture_default_str();
    app.add_option("--shape", c.shape, "Weibull shape")->capture_default_str();
    app.add_option("--scale", c.scale, "scale (Weibull, exponential) or upper bound (uniform)")->capture_default_str();
    app.add_option("--rule", c.rule, "load-sharing rule: absorbing, equal, independent")->capture_default_str();
    app.add_option("--structure", c.structure, "structure: parallel, column-paths")->capture_default_str();
    app.add_option("--replicas", c.replicas, "Monte Carlo replicas")->capture_default_str();
    app.add_option("--seed", c.seed, "random seed")->capture_default_str();
    app.add_option("--chain", c.chain, "bundles per chain (1: no chain)")->capture_default_str();
    app.add_option("--tail-lo", c.tail_lo, "lower empirical quantile of the tail window")->capture_default_str();
    app.add_option("--tail-hi", c.tail_hi, "upper empirical quantile of the tail window")->capture_default_str();
    app.add_option("--ref-percentile", c.ref_percentile, "reference strength percentile p")->capture_default_str();
    app.add_option("--percentiles", c.percentiles, "target strength percentiles p'")->delimiter(',');
    app.add_option("--a", c.a, "strength degradation factor per cycle")->capture_default_str();
    app.add_option("--s-star", c.s_star, "peak load per component in every cycle")->capture_default_str();
    app.add_option("--out", c.out, "output directory")->capture_default_str();
    app.add_option("--workers", c.workers, "worker threads (0: available parallelism)")->capture_default_str();
    app.add_option("--samples", c.samples, "strength samples file for gibbs percentiles");
    app.add_option("--input", c.input, "censored data CSV (value,censored) for analyze");
    app.add_option("--kind", c.kind, "density kind");
    app.add_option("--m", c.m, "Irwin-Hall order")->capture_default_str();
    app.add_option("--k", c.k, "first order statistic index")->capture_default_str();
    app.add_option("--l", c.l, "second order statistic index")->capture_default_str();
    app.add_option("--n", c.n, "sample size")->capture_default_str();
    app.add_option("--x", c.x, "first conditioning value")->capture_default_str();
    app.add_option("--y", c.y, "second conditioning value")->capture_default_str();
    app.add_option("--from", c.from, "grid start")->capture_default_str();
    app.add_option("--to", c.to, "grid end")->capture_default_str();
    app.add_option("--step", c.step, "grid step")->capture_default_str();
    app.add_option("--pattern", c.pattern, "breaking pattern, e.g. \"1(2,3) 4\"");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "sample bundle strengths and fit the lower-tail Weibull slope"},
        {"gibbs", "exact Gibbs measures at strength percentiles and linear median field fits"},
        {"analyze", "Kaplan-Meier curve and censored Weibull fit of a data file"},
        {"cycles", "cycles to failure under geometric strength degradation"},
        {"density", "tabulate threshold and pattern densities"}};
    for (const auto &[name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }
    c.command = app.get_subcommands().front()->get_name();
    try {
        if (c.command == "simulate") cmd_simulate(c);
        else if (c.command == "gibbs") cmd_gibbs(c);
        else if (c.command == "analyze") cmd_analyze(c);
        else if (c.command == "cycles") cmd_cycles(c);
        else cmd_density(c);
    } catch (const IoError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InsufficientTailError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

} // namespace fbm::cli
