#include "fbm/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fbm {

SubsetTable::SubsetTable(int n) : n_(n) {
    if (n < 0 || n > kMaxBits) throw std::invalid_argument("SubsetTable: n out of range");
    values_ = Eigen::VectorXd::Zero(Eigen::Index{1} << n);
}

SubsetTable::SubsetTable(int n, Eigen::VectorXd values) : n_(n), values_(std::move(values)) {
    if (n < 0 || n > kMaxBits) throw std::invalid_argument("SubsetTable: n out of range");
    if (values_.size() != (Eigen::Index{1} << n)) throw std::invalid_argument("SubsetTable: need 2^n values");
}

double log_odds(const StrengthDistribution &dist, int i, double load) {
    const double lf = dist.log_cdf(i, load);
    const double ls = dist.log_sf(i, load);
    if (!std::isfinite(lf) || !std::isfinite(ls))
        throw PositivityError("positivity condition violated: F_" + std::to_string(i) + "(" + std::to_string(load) +
                              ") is not strictly between 0 and 1");
    return ls - lf;
}

double log_odds(const Configuration &a, int i, double s, const LoadShareRule &rule,
                const StrengthDistribution &dist) {
    if (!a.has(i)) throw std::invalid_argument("log_odds: component is not in the configuration");
    std::vector<double> lam(rule.size());
    rule.evaluate(a.working, lam);
    return log_odds(dist, i, lam[i] * s);
}

namespace {

constexpr std::size_t kSweepBlock = std::size_t{1} << 14;

// One pass per bit; within a pass entries with the bit set read entries
// with it clear, so blocks of a pass are independent.
template <class Op>
void layered_sweep(Eigen::VectorXd &t, int n, unsigned workers, Op op) {
    const std::size_t total = static_cast<std::size_t>(t.size());
    const std::size_t blocks = (total + kSweepBlock - 1) / kSweepBlock;
    for (int b = 0; b < n; ++b) {
        const Mask bit = Mask{1} << b;
        parallel_for_blocks(blocks, workers, [&](std::size_t blk) {
            const std::size_t end = std::min(total, (blk + 1) * kSweepBlock);
            for (std::size_t m = blk * kSweepBlock; m < end; ++m)
                if (m & bit) op(t[static_cast<Eigen::Index>(m)], t[static_cast<Eigen::Index>(m ^ bit)]);
        });
    }
}

void mobius(Eigen::VectorXd &t, int n, unsigned workers) {
    layered_sweep(t, n, workers, [](double &hi, double lo) { hi -= lo; });
}

void zeta(Eigen::VectorXd &t, int n, unsigned workers) {
    layered_sweep(t, n, workers, [](double &hi, double lo) { hi += lo; });
}

double log_sum_exp_neg(const Eigen::VectorXd &u) {
    const double lo = u.minCoeff();
    return -lo + std::log((-(u.array() - lo)).exp().sum());
}

} // namespace

SubsetTable mobius_potentials(const SubsetTable &sigma, unsigned workers) {
    if (sigma[0] != 0.0) throw std::invalid_argument("mobius_potentials: sigma(empty) must be 0");
    SubsetTable v = sigma;
    mobius(v.values(), v.n(), workers);
    for (std::size_t m = 1; m < v.size(); ++m) v[m] /= cardinality(m);
    v[0] = 0.0;
    return v;
}

SubsetTable mobius_energy(const SubsetTable &potentials, unsigned workers) {
    if (potentials[0] != 0.0) throw std::invalid_argument("mobius_energy: V(empty) must be 0");
    SubsetTable u = potentials;
    zeta(u.values(), u.n(), workers);
    u.values() = -u.values();
    return u;
}

SubsetTable energy_potentials(const SubsetTable &energy, unsigned workers) {
    SubsetTable v = energy;
    mobius(v.values(), v.n(), workers);
    v.values() = -v.values();
    return v;
}

double GibbsModel::probability(Mask a) const { return std::exp(log_probability(a)); }

Eigen::VectorXd GibbsModel::probabilities() const { return (-(energy.values().array() + logZ)).exp().matrix(); }

double log_partition(const SubsetTable &energy) { return log_sum_exp_neg(energy.values()); }

double total_variation(const SubsetTable &energy_p, const SubsetTable &energy_q) {
    if (energy_p.n() != energy_q.n()) throw std::invalid_argument("total_variation: tables differ in size");
    const double zp = log_partition(energy_p), zq = log_partition(energy_q);
    const auto p = (-(energy_p.values().array() + zp)).exp();
    const auto q = (-(energy_q.values().array() + zq)).exp();
    return 0.5 * (p - q).abs().sum();
}

GibbsModel build_gibbs(double s, const LoadShareRule &rule, const StrengthDistribution &dist, unsigned workers) {
    const int n = rule.size();
    if (n > kMaxGibbsComponents)
        throw std::invalid_argument("build_gibbs: n = " + std::to_string(n) +
                                    " exceeds the exact-enumeration bound of 20; use a sampling method instead");
    if (!(s > 0.0)) throw std::invalid_argument("build_gibbs: load per component must be positive");
    GibbsModel model;
    model.n = n;
    model.s = s;
    model.sigma = SubsetTable(n);
    const std::size_t total = std::size_t{1} << n;
    const std::size_t blocks = (total + kSweepBlock - 1) / kSweepBlock;
    Eigen::VectorXd &sig = model.sigma.values();
    parallel_for_blocks(blocks, workers, [&](std::size_t blk) {
        std::vector<double> lam(n);
        const std::size_t end = std::min(total, (blk + 1) * kSweepBlock);
        for (std::size_t m = std::max<std::size_t>(1, blk * kSweepBlock); m < end; ++m) {
            std::span<const double> l = rule.shares(m, lam);
            double acc = 0.0;
            for_each_member(m, [&](int i) { acc += log_odds(dist, i, l[i] * s); });
            sig[static_cast<Eigen::Index>(m)] = acc;
        }
    });
    model.potentials = mobius_potentials(model.sigma, workers);
    model.energy = mobius_energy(model.potentials, workers);
    model.logZ = log_partition(model.energy);
    return model;
}

SubsetTable lmf_energy(const GibbsModel &reference, double slope, double intercept) {
    SubsetTable v(reference.n);
    for (std::size_t m = 1; m < v.size(); ++m) v[m] = slope * reference.potentials[m] + intercept;
    return mobius_energy(v);
}

SubsetTable lmf_median_energy(int n, std::span<const double> median_potentials, double slope, double intercept) {
    if (static_cast<int>(median_potentials.size()) != n)
        throw std::invalid_argument("lmf_median_energy: need one median per subset size");
    SubsetTable u(n);
    // sum over k of C(|A|, k) (a v(k) + b), computed once per size.
    std::vector<double> by_size(n + 1, 0.0);
    for (int a = 1; a <= n; ++a) {
        double binom = 1.0, acc = 0.0;
        for (int k = 1; k <= a; ++k) {
            binom = binom * (a - k + 1) / k;
            acc += binom * (slope * median_potentials[k - 1] + intercept);
        }
        by_size[a] = -acc;
    }
    for (std::size_t m = 0; m < u.size(); ++m) u[m] = by_size[cardinality(m)];
    return u;
}

LMFFit lmf_fit(const GibbsModel &reference, const GibbsModel &target, double p, double p_prime) {
    if (reference.n != target.n) throw std::invalid_argument("lmf_fit: models differ in component count");
    const int n = reference.n;
    const std::size_t total = reference.potentials.size();
    if (total < 3) throw std::domain_error("lmf_fit: need at least two nonempty subsets");
    const Eigen::VectorXd x = reference.potentials.values().tail(total - 1);
    const Eigen::VectorXd y = target.potentials.values().tail(total - 1);
    const double mx = x.mean(), my = y.mean();
    const Eigen::ArrayXd dx = x.array() - mx, dy = y.array() - my;
    const double sxx = dx.square().sum(), syy = dy.square().sum(), sxy = (dx * dy).sum();
    if (!(sxx > 0.0)) throw std::domain_error("lmf_fit: reference potentials have zero variance; fit rejected");

    LMFFit fit;
    fit.p = p;
    fit.p_prime = p_prime;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;

    std::vector<std::vector<double>> by_size(n + 1);
    for (std::size_t m = 1; m < total; ++m) by_size[cardinality(m)].push_back(reference.potentials[m]);
    fit.median_potentials.resize(n);
    for (int k = 1; k <= n; ++k) {
        auto &v = by_size[k];
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
        double med = v[mid];
        if (v.size() % 2 == 0) med = 0.5 * (med + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
        fit.median_potentials[k - 1] = med;
    }
    fit.tv_error = total_variation(lmf_energy(reference, fit.slope, fit.intercept), target.energy);
    fit.tv_error_median =
        total_variation(lmf_median_energy(n, fit.median_potentials, fit.slope, fit.intercept), target.energy);
    return fit;
}

double strength_percentile(std::span<const double> samples, double p) {
    if (samples.empty()) throw std::invalid_argument("strength_percentile: empty sample");
    if (!(p > 0.0 && p < 100.0)) throw std::invalid_argument("strength_percentile: p must lie in (0, 100)");
    std::vector<double> v(samples.begin(), samples.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
    const double a = v[lo];
    if (lo + 1 >= v.size()) return a;
    const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
    return a + (h - std::floor(h)) * (b - a);
}

} // namespace fbm
