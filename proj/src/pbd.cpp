#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "fbm/rng.hpp"
#include "fbm/stats.hpp"

namespace fbm {

Partition::Partition(std::vector<double> cuts) : cuts_(std::move(cuts)) {
    for (std::size_t i = 0; i < cuts_.size(); ++i) {
        if (!(cuts_[i] > 0.0) || !std::isfinite(cuts_[i])) throw std::invalid_argument("partition: cut points must be positive");
        if (i > 0 && !(cuts_[i] > cuts_[i - 1])) throw std::invalid_argument("partition: cut points must increase");
    }
}

double Partition::right(std::size_t j) const {
    return j < cuts_.size() ? cuts_[j] : std::numeric_limits<double>::infinity();
}

std::size_t Partition::cell_of(double x) const {
    return static_cast<std::size_t>(std::upper_bound(cuts_.begin(), cuts_.end(), x) - cuts_.begin());
}

std::vector<int> Partition::cell_set(const CensoredSample &obs) const {
    if (!(obs.value >= 0.0)) throw std::invalid_argument("partition: observation must be non-negative");
    const std::size_t c = cell_of(obs.value);
    if (!obs.censored) return {static_cast<int>(c)};
    std::vector<int> out;
    for (std::size_t j = c; j < cells(); ++j) out.push_back(static_cast<int>(j));
    return out;
}

Eigen::VectorXd pbd_prior(const Partition &partition, double shape, double scale, double mass) {
    if (!(shape > 0.0) || !(scale > 0.0) || !(mass > 0.0))
        throw std::invalid_argument("pbd_prior: shape, scale and mass must be positive");
    auto cdf = [&](double x) { return std::isinf(x) ? 1.0 : -std::expm1(-std::pow(x / scale, shape)); };
    Eigen::VectorXd alpha(static_cast<Eigen::Index>(partition.cells()));
    for (std::size_t j = 0; j < partition.cells(); ++j)
        alpha[static_cast<Eigen::Index>(j)] = mass * (cdf(partition.right(j)) - cdf(partition.left(j)));
    return alpha;
}

namespace {

struct Aggregator {
    std::map<std::vector<int>, double> log_weight; // log of summed weights per count vector

    void add(const std::vector<int> &counts, double lw) {
        auto [it, inserted] = log_weight.try_emplace(counts, lw);
        if (!inserted) {
            const double hi = std::max(it->second, lw), lo = std::min(it->second, lw);
            it->second = hi + std::log1p(std::exp(lo - hi));
        }
    }
};

PBDPosterior finish(const Eigen::VectorXd &prior, const Aggregator &agg, bool exact, double space) {
    PBDPosterior post;
    post.prior = prior;
    post.exact = exact;
    post.assignments = space;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto &[c, lw] : agg.log_weight) top = std::max(top, lw);
    double total = 0.0;
    for (const auto &[c, lw] : agg.log_weight) total += std::exp(lw - top);
    for (const auto &[c, lw] : agg.log_weight) {
        DirichletComponent d;
        d.counts = c;
        d.parameter = prior;
        for (std::size_t j = 0; j < c.size(); ++j) d.parameter[static_cast<Eigen::Index>(j)] += c[j];
        d.weight = std::exp(lw - top) / total;
        post.mixture.push_back(std::move(d));
    }
    return post;
}

void enumerate(const Eigen::VectorXd &alpha, const std::vector<std::vector<int>> &sets, std::size_t t,
               std::vector<int> &counts, double lw, Aggregator &agg) {
    if (t == sets.size()) {
        agg.add(counts, lw);
        return;
    }
    for (int j : sets[t]) {
        const double factor = alpha[j] + counts[j];
        ++counts[j];
        enumerate(alpha, sets, t + 1, counts, lw + std::log(factor), agg);
        --counts[j];
    }
}

} // namespace

PBDPosterior pbd_posterior(const Eigen::VectorXd &prior, const std::vector<std::vector<int>> &cell_sets,
                           std::uint64_t seed, std::size_t draws) {
    const auto cells = static_cast<int>(prior.size());
    if (cells < 1) throw std::invalid_argument("pbd_posterior: empty partition");
    if ((prior.array() <= 0.0).any()) throw std::invalid_argument("pbd_posterior: prior weights must be positive");
    double space = 1.0;
    for (std::size_t t = 0; t < cell_sets.size(); ++t) {
        const auto &s = cell_sets[t];
        if (s.empty()) throw std::invalid_argument("pbd_posterior: observation " + std::to_string(t) + " has an empty cell set");
        for (int j : s)
            if (j < 0 || j >= cells) throw std::invalid_argument("pbd_posterior: cell index out of range");
        if (std::adjacent_find(s.begin(), s.end(), [](int a, int b) { return a >= b; }) != s.end())
            throw std::invalid_argument("pbd_posterior: cell sets must be strictly increasing");
        space *= static_cast<double>(s.size());
    }

    Aggregator agg;
    std::vector<int> counts(static_cast<std::size_t>(cells), 0);
    if (space <= kPbdExactLimit) {
        enumerate(prior, cell_sets, 0, counts, 0.0, agg);
        return finish(prior, agg, true, space);
    }
    // Sequential urn proposal: observation t goes to j in S_t with probability
    // proportional to alpha_j + n_j; the importance weight is the product of
    // the proposal normalizers.
    if (draws < 1) throw std::invalid_argument("pbd_posterior: need at least one Monte Carlo draw");
    Rng rng = block_rng(seed, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> w;
    for (std::size_t d = 0; d < draws; ++d) {
        std::fill(counts.begin(), counts.end(), 0);
        double lw = 0.0;
        for (const auto &s : cell_sets) {
            w.resize(s.size());
            double tot = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) tot += (w[k] = prior[s[k]] + counts[s[k]]);
            double u = unif(rng) * tot;
            std::size_t k = 0;
            while (k + 1 < s.size() && u >= w[k]) u -= w[k++];
            ++counts[s[k]];
            lw += std::log(tot);
        }
        agg.add(counts, lw);
    }
    return finish(prior, agg, false, space);
}

PBDPosterior pbd_posterior(const Partition &partition, double shape, double scale, double mass,
                           std::span<const CensoredSample> observations, std::uint64_t seed, std::size_t draws) {
    std::vector<std::vector<int>> sets;
    sets.reserve(observations.size());
    for (const auto &o : observations) sets.push_back(partition.cell_set(o));
    return pbd_posterior(pbd_prior(partition, shape, scale, mass), sets, seed, draws);
}

} // namespace fbm
