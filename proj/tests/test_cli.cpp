#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using fbm::cli::run;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("fbm_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

int call(std::vector<std::string> args) {
    args.insert(args.begin(), "fbm");
    std::vector<const char *> argv;
    for (const auto &a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path &p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> csv(const fs::path &p) {
    std::ifstream f(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(f, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

} // namespace

TEST_CASE("usage errors exit with 2") {
    const auto out = scratch("usage").string();
    CHECK(call({"simulate", "--replicas", "0", "--out", out}) == 2);
    CHECK(call({"density", "--kind", "bogus", "--out", out}) == 2);
    CHECK(call({"cycles", "--a", "1", "--out", out}) == 2);
    CHECK(call({"cycles", "--a", "1.5", "--out", out}) == 2);
    CHECK(call({"gibbs", "--out", out}) == 2);
    CHECK(call({"gibbs", "--rows", "3", "--cols", "7", "--percentiles", "50", "--out", out}) == 2);
    CHECK(call({"simulate", "--rule", "nearest", "--out", out}) == 2);
    CHECK(call({"simulate", "--bogus-flag"}) == 2);
    CHECK(call({}) == 2);
}

TEST_CASE("I/O errors exit with 4") {
    CHECK(call({"simulate", "--replicas", "10", "--out", "/proc/fbm_cannot_write_here"}) == 4);
    const fs::path dir = scratch("io");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.csv") << "value,censored\n1.5,0\nabc,1\n";
    CHECK(call({"analyze", "--input", (dir / "bad.csv").string(), "--out", (dir / "o").string()}) == 4);
    CHECK(call({"analyze", "--input", (dir / "missing.csv").string(), "--out", (dir / "o").string()}) == 4);
}

TEST_CASE("simulate writes samples, plot, fit and manifest") {
    const fs::path out = scratch("sim");
    REQUIRE(call({"simulate", "--rows", "2", "--cols", "3", "--replicas", "200000", "--seed", "5", "--tail-lo", "1e-3",
                  "--tail-hi", "1e-1", "--out", out.string(), "--workers", "2", "--chain", "3"}) == 0);
    const auto samples = csv(out / "samples.csv");
    CHECK(samples.front().front() == "strength");
    CHECK(samples.size() == 200001);
    CHECK(fs::exists(out / "chain_samples.csv"));
    CHECK(csv(out / "weibull_plot.csv").front() == std::vector<std::string>{"ln_x", "ln_neg_ln_sf"});
    const auto fit = nlohmann::json::parse(slurp(out / "tail_fit.json"));
    CHECK(fit["smallest_cut"] == 3);
    CHECK(fit["bundle"]["slope"].get<double>() > 5.0);
    CHECK(fit["chain"]["length"] == 3);
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["config"]["rows"] == 2);
    CHECK(manifest["config"]["replicas"] == 200000);
    CHECK(manifest["version"].is_string());
    CHECK(manifest["outputs"].size() == 4);
}

TEST_CASE("simulate output does not depend on the worker count") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    for (auto [dir, w] : {std::pair{a, "1"}, {b, "3"}})
        REQUIRE(call({"simulate", "--replicas", "30000", "--seed", "9", "--workers", w, "--tail-lo", "1e-2",
                      "--tail-hi", "1e-1", "--out", dir.string()}) == 0);
    CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));
    CHECK(slurp(a / "tail_fit.json") == slurp(b / "tail_fit.json"));
}

TEST_CASE("two-component grid matches the exact bundle law") {
    const fs::path out = scratch("pair");
    REQUIRE(call({"simulate", "--rows", "1", "--cols", "2", "--rule", "equal", "--family", "exponential", "--scale", "1",
                  "--replicas", "100000", "--tail-lo", "1e-2", "--tail-hi", "1e-1", "--out", out.string()}) == 0);
    const auto rows = csv(out / "samples.csv");
    std::vector<double> s;
    for (std::size_t i = 1; i < rows.size(); ++i) s.push_back(std::stod(rows[i][0]));
    std::sort(s.begin(), s.end());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double x = s[i];
        const double f = std::pow(1 - std::exp(-2 * x), 2) - std::pow(std::exp(-x) - std::exp(-2 * x), 2);
        d = std::max({d, (i + 1.0) / s.size() - f, f - double(i) / s.size()});
    }
    CHECK(d < 0.01);
}

TEST_CASE("config file with flag precedence") {
    const fs::path dir = scratch("cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "run.conf") << "rows=2\ncols=3\nreplicas=5000\nseed=3\ntail-lo=0.01\ntail-hi=0.2\nout="
                                    << (dir / "from_file").string() << "\n";
    REQUIRE(call({"simulate", "--config", (dir / "run.conf").string(), "--replicas", "7000", "--out",
                  (dir / "from_flag").string()}) == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "from_flag" / "manifest.json"));
    CHECK(m["config"]["rows"] == 2);
    CHECK(m["config"]["cols"] == 3);
    CHECK(m["config"]["replicas"] == 7000);
    CHECK_FALSE(fs::exists(dir / "from_file"));
}

TEST_CASE("gibbs with independent components") {
    const fs::path out = scratch("gibbs");
    REQUIRE(call({"gibbs", "--rows", "1", "--cols", "2", "--rule", "independent", "--replicas", "20000",
                  "--ref-percentile", "10", "--percentiles", "50,90", "--out", out.string()}) == 0);
    for (const char *f : {"potentials.csv", "potentials_50.csv", "potentials_90.csv"}) {
        const auto rows = csv(out / f);
        REQUIRE(rows.size() == 5);
        CHECK(rows[0] == std::vector<std::string>{"subset_mask", "subset_size", "V", "U"});
        CHECK(std::abs(std::stod(rows[4][2])) < 1e-12); // V({1,2})
    }
    const auto lmf = nlohmann::json::parse(slurp(out / "lmf.json"));
    REQUIRE(lmf.size() == 2);
    CHECK(lmf[0]["p_prime"] == 50.0);
    CHECK(lmf[0]["tv_error"].get<double>() < 1e-9);
}

TEST_CASE("gibbs from a samples file") {
    const fs::path dir = scratch("gibbs_file");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "s.csv");
        f << "strength\n";
        for (int i = 1; i <= 1000; ++i) f << 0.5 + i * 0.001 << "\n";
    }
    REQUIRE(call({"gibbs", "--rows", "2", "--cols", "2", "--samples", (dir / "s.csv").string(), "--percentiles", "1",
                  "--out", (dir / "o").string()}) == 0);
    const auto lmf = nlohmann::json::parse(slurp(dir / "o" / "lmf.json"));
    CHECK(lmf[0]["s_p_prime"].get<double>() == doctest::Approx(0.5 + 10.99 * 0.001));
}

TEST_CASE("analyze: fit and all-censored warning") {
    const fs::path dir = scratch("analyze");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "d.csv");
        f << "value,censored\n";
        for (double v : {1.2, 0.7, 2.5, 1.9, 0.3, 3.1}) f << v << ",0\n";
        f << "3.0,1\n";
    }
    REQUIRE(call({"analyze", "--input", (dir / "d.csv").string(), "--out", (dir / "o").string()}) == 0);
    const auto km = csv(dir / "o" / "km.csv");
    CHECK(km[0] == std::vector<std::string>{"time", "surv", "lo", "hi"});
    CHECK(km.size() == 8);
    const auto fit = nlohmann::json::parse(slurp(dir / "o" / "weibull_fit.json"));
    CHECK(fit["converged"] == true);
    CHECK(fit["events"] == 6);

    std::ofstream(dir / "c.csv") << "1.0,1\n2.0,1\n";
    REQUIRE(call({"analyze", "--input", (dir / "c.csv").string(), "--out", (dir / "oc").string()}) == 0);
    CHECK(csv(dir / "oc" / "km.csv").size() == 2);
}

TEST_CASE("cycles") {
    const fs::path out = scratch("cycles");
    REQUIRE(call({"cycles", "--rows", "2", "--cols", "3", "--replicas", "500", "--s-star", "1000", "--a", "0.5", "--out",
                  out.string()}) == 0);
    const auto rows = csv(out / "cycles.csv");
    REQUIRE(rows.size() == 501);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][1] == "1");
    const auto summary = nlohmann::json::parse(slurp(out / "cycles_summary.json"));
    CHECK(summary["max"] == 1.0);
}

TEST_CASE("density tables") {
    const fs::path a = scratch("ih");
    REQUIRE(call({"density", "--kind", "irwin-hall", "--m", "2", "--from", "0", "--to", "2", "--step", "0.5", "--out",
                  a.string()}) == 0);
    const auto ih = csv(a / "density.csv");
    REQUIRE(ih.size() == 6);
    CHECK(ih[2] == std::vector<std::string>{"0.5", "0.5"});
    CHECK(ih[3] == std::vector<std::string>{"1", "1"});

    const fs::path b = scratch("mix");
    REQUIRE(call({"density", "--kind", "mixing", "--k", "2", "--n", "5", "--out", b.string()}) == 0);
    CHECK(nlohmann::json::parse(slurp(b / "density.json"))["normalizer"].get<double>() == doctest::Approx(20.0));

    const fs::path c = scratch("joint");
    REQUIRE(call({"density", "--kind", "order-stat-joint", "--k", "2", "--l", "4", "--n", "6", "--from", "0.1", "--to",
                  "2", "--step", "0.3", "--out", c.string()}) == 0);
    CHECK(nlohmann::json::parse(slurp(c / "density.json"))["max_relative_gap"].get<double>() < 1e-6);

    const fs::path d = scratch("tilt");
    REQUIRE(call({"density", "--kind", "tilted", "--k", "2", "--l", "4", "--n", "6", "--x", "0.3", "--y", "0.9",
                  "--out", d.string()}) == 0);
    CHECK(csv(d / "density.csv").size() == 203);

    const fs::path e = scratch("pattern");
    REQUIRE(call({"density", "--kind", "pattern", "--pattern", "1 2", "--rows", "1", "--cols", "2", "--rule", "equal",
                  "--structure", "parallel", "--family", "exponential", "--scale", "1", "--from", "0", "--to", "3",
                  "--step", "1", "--out", e.string()}) == 0);
    CHECK(nlohmann::json::parse(slurp(e / "density.json"))["probability"].get<double>() ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(call({"density", "--kind", "pattern", "--out", e.string()}) == 2);
}
