#include "fbm/loadshare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <unordered_map>

#include "fbm/parallel.hpp"
#include "fbm/rng.hpp"

namespace fbm {

bool ComponentGraph::adjacent(int i, int j) const {
    const auto &nb = adjacency.at(i);
    return std::find(nb.begin(), nb.end(), j) != nb.end();
}

ComponentGraph build_grid_graph(int rows, int cols) {
    if (rows < 1) throw std::invalid_argument("grid needs at least one row");
    if (cols < 2) throw std::invalid_argument("grid needs at least two columns: a single fiber has no neighbor to share load with");
    if (static_cast<long>(rows) * cols > kMaxComponents)
        throw std::invalid_argument("grid larger than 64 nodes");
    ComponentGraph g;
    g.rows = rows;
    g.cols = cols;
    g.adjacency.resize(static_cast<std::size_t>(rows * cols));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            auto &nb = g.adjacency[g.node(r, c)];
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; dc += 2) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr >= 0 && rr < rows && cc >= 0 && cc < cols) nb.push_back(g.node(rr, cc));
                }
            }
            std::sort(nb.begin(), nb.end());
        }
    }
    return g;
}

ComponentGraph build_complete_graph(int n) {
    if (n < 2) throw std::invalid_argument("complete graph needs at least two nodes");
    ComponentGraph g;
    g.rows = 1;
    g.cols = n;
    g.adjacency.resize(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) g.adjacency[i].push_back(j);
    return g;
}

TransitionMatrix transition_matrix(const ComponentGraph &g) {
    const int n = g.size();
    if (n == 0) throw std::invalid_argument("transition_matrix: empty graph");
    TransitionMatrix t{Eigen::MatrixXd::Zero(n, n)};
    for (int i = 0; i < n; ++i) {
        const auto &nb = g.adjacency[i];
        if (nb.empty()) throw std::invalid_argument("transition_matrix: isolated node");
        const double w = 1.0 / static_cast<double>(nb.size());
        for (int j : nb) {
            if (j < 0 || j >= n) throw std::invalid_argument("transition_matrix: neighbor index out of range");
            t.p(i, j) = w;
        }
    }
    return t;
}

AbsorptionProbabilities absorption_probabilities(const TransitionMatrix &p, const Configuration &a) {
    if (a.n != p.size()) throw std::invalid_argument("absorption_probabilities: configuration size mismatch");
    if (a.empty()) throw std::invalid_argument("absorption_probabilities: working set must be nonempty");
    AbsorptionProbabilities out;
    out.failed = members(a.failed());
    out.working = members(a.working);
    out.u = absorption_matrix(p.p, out.failed, out.working);
    return out;
}

LoadShareVector::LoadShareVector(Configuration config, Eigen::VectorXd values)
    : config_(config), values_(std::move(values)) {
    if (values_.size() != config_.n) throw std::invalid_argument("LoadShareVector: size mismatch");
}

double LoadShareVector::at(int i) const {
    if (i < 0 || i >= config_.n || !config_.has(i))
        throw std::out_of_range("load share is defined only for working components");
    return values_[i];
}

double LoadShareVector::total() const {
    double sum = 0.0;
    for_each_member(config_.working, [&](int i) { sum += values_[i]; });
    return sum;
}

LoadShareVector absorbing_load_share(const TransitionMatrix &p, const Configuration &a) {
    return AbsorbingLoadShare(p, false)(a);
}

LoadShareVector equal_load_share(int n, const Configuration &a) {
    if (a.n != n) throw std::invalid_argument("equal_load_share: configuration size mismatch");
    return EqualLoadShare(n)(a);
}

LoadShareVector LoadShareRule::operator()(const Configuration &a) const {
    if (a.n != size()) throw std::invalid_argument("load-sharing rule: configuration size mismatch");
    if (a.empty()) throw std::invalid_argument("load-sharing rule: working set must be nonempty");
    Eigen::VectorXd v = Eigen::VectorXd::Constant(a.n, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> buf(a.n, std::numeric_limits<double>::quiet_NaN());
    evaluate(a.working, buf);
    for_each_member(a.working, [&](int i) { v[i] = buf[i]; });
    return {a, std::move(v)};
}

EqualLoadShare::EqualLoadShare(int n) : n_(n) {
    if (n < 1 || n > kMaxComponents) throw std::invalid_argument("equal rule: bad component count");
}

void EqualLoadShare::evaluate(Mask working, std::span<double> lambda) const {
    const double share = static_cast<double>(n_) / cardinality(working);
    for_each_member(working, [&](int i) { lambda[i] = share; });
}

IndependentLoadShare::IndependentLoadShare(int n) : n_(n) {
    if (n < 1 || n > kMaxComponents) throw std::invalid_argument("independent rule: bad component count");
}

void IndependentLoadShare::evaluate(Mask working, std::span<double> lambda) const {
    for_each_member(working, [&](int i) { lambda[i] = 1.0; });
}

struct AbsorbingLoadShare::Cache {
    mutable std::shared_mutex mutex;
    std::unordered_map<Mask, std::vector<double>> entries;
};

AbsorbingLoadShare::AbsorbingLoadShare(TransitionMatrix p, bool memoize)
    : p_(std::move(p)), cache_(memoize ? std::make_shared<Cache>() : nullptr) {
    if (p_.size() < 1 || p_.size() > kMaxComponents || p_.p.cols() != p_.p.rows())
        throw std::invalid_argument("absorbing rule: bad transition matrix");
}

AbsorbingLoadShare::~AbsorbingLoadShare() = default;

std::size_t AbsorbingLoadShare::cached() const {
    if (!cache_) return 0;
    std::shared_lock lock(cache_->mutex);
    return cache_->entries.size();
}

void AbsorbingLoadShare::solve(Mask working, std::span<double> lambda) const {
    const int n = size();
    const std::vector<int> failed = members(full_mask(n) & ~working);
    const std::vector<int> alive = members(working);
    const Eigen::MatrixXd u = absorption_matrix(p_.p, failed, alive);
    const Eigen::RowVectorXd received = u.colwise().sum();
    for (std::size_t k = 0; k < alive.size(); ++k)
        lambda[alive[k]] = 1.0 + (failed.empty() ? 0.0 : received[static_cast<Eigen::Index>(k)]);
}

void AbsorbingLoadShare::evaluate(Mask working, std::span<double> lambda) const {
    if (working == 0) throw std::invalid_argument("absorbing rule: working set must be nonempty");
    if (!cache_) {
        solve(working, lambda);
        return;
    }
    {
        std::shared_lock lock(cache_->mutex);
        auto it = cache_->entries.find(working);
        if (it != cache_->entries.end()) {
            for_each_member(working, [&](int i) { lambda[i] = it->second[i]; });
            return;
        }
    }
    std::vector<double> row(size(), std::numeric_limits<double>::quiet_NaN());
    solve(working, row);
    for_each_member(working, [&](int i) { lambda[i] = row[i]; });
    std::unique_lock lock(cache_->mutex);
    cache_->entries.try_emplace(working, std::move(row));
}

FunctionLoadShare::FunctionLoadShare(int n, Fn fn, std::string name)
    : n_(n), fn_(std::move(fn)), name_(std::move(name)) {}

PoweredLoadShare::PoweredLoadShare(std::shared_ptr<const LoadShareRule> base, double shape,
                                   std::vector<double> scales)
    : base_(std::move(base)), shape_(shape), scales_(std::move(scales)) {
    if (!base_) throw std::invalid_argument("powered rule: null base rule");
    if (!(shape_ > 0.0)) throw std::invalid_argument("powered rule: shape must be positive");
    if (scales_.size() == 1) scales_.assign(base_->size(), scales_[0]);
    if (static_cast<int>(scales_.size()) != base_->size())
        throw std::invalid_argument("powered rule: need one scale or one per component");
}

void PoweredLoadShare::evaluate(Mask working, std::span<double> lambda) const {
    base_->evaluate(working, lambda);
    for_each_member(working, [&](int i) { lambda[i] = std::pow(lambda[i] / scales_[i], shape_); });
}

LoadShareTable LoadShareTable::tabulate(const LoadShareRule &rule, unsigned workers) {
    const int n = rule.size();
    if (n > kMaxTabulated) throw std::invalid_argument("load-share table limited to 20 components");
    LoadShareTable t(n, rule.name());
    const std::size_t configs = std::size_t{1} << n;
    t.data_.assign(configs * n, std::numeric_limits<double>::quiet_NaN());
    constexpr std::size_t kBlock = 1024;
    const std::size_t blocks = (configs + kBlock - 1) / kBlock;
    parallel_for_blocks(blocks, workers, [&](std::size_t b) {
        const std::size_t end = std::min(configs, (b + 1) * kBlock);
        for (std::size_t m = std::max<std::size_t>(1, b * kBlock); m < end; ++m)
            rule.evaluate(static_cast<Mask>(m), {t.data_.data() + m * n, static_cast<std::size_t>(n)});
    });
    return t;
}

void LoadShareTable::evaluate(Mask working, std::span<double> lambda) const {
    const auto r = row(working);
    for_each_member(working, [&](int i) { lambda[i] = r[i]; });
}

std::unique_ptr<LoadShareRule> make_rule(const std::string &name, const ComponentGraph &g, bool memoize) {
    if (name == "absorbing") return std::make_unique<AbsorbingLoadShare>(transition_matrix(g), memoize);
    if (name == "equal") return std::make_unique<EqualLoadShare>(g.size());
    if (name == "independent") return std::make_unique<IndependentLoadShare>(g.size());
    throw std::invalid_argument("unknown load-sharing rule '" + name + "'");
}

namespace {

std::optional<MonotoneViolation> check_pair(std::span<const double> lam_a, std::span<const double> lam_b, Mask a,
                                            Mask b, double tol) {
    std::optional<MonotoneViolation> bad;
    for_each_member(a, [&](int j) {
        if (!bad && lam_b[j] > lam_a[j] + tol * std::max(1.0, std::abs(lam_a[j])))
            bad = MonotoneViolation{a, b, j};
    });
    return bad;
}

double total_on(std::span<const double> lam, Mask m) {
    double s = 0.0;
    for_each_member(m, [&](int i) { s += lam[i]; });
    return s;
}

} // namespace

MonotoneReport verify_monotone(const LoadShareRule &rule, std::uint64_t sample_budget, std::uint64_t seed,
                               double tolerance) {
    const int n = rule.size();
    MonotoneReport report;
    if (n <= 12) {
        report.exhaustive = true;
        const LoadShareTable table = LoadShareTable::tabulate(rule);
        const Mask all = full_mask(n);
        for (Mask b = 1; b <= all; ++b) {
            const auto lam_b = table.row(b);
            if (!(total_on(lam_b, b) > 0.0)) {
                report.monotone = false;
                report.counterexample = MonotoneViolation{b, b, -1};
                return report;
            }
            for (Mask a = (b - 1) & b; a != 0; a = (a - 1) & b) {
                ++report.pairs_checked;
                if (auto bad = check_pair(table.row(a), lam_b, a, b, tolerance)) {
                    report.monotone = false;
                    report.counterexample = bad;
                    return report;
                }
            }
        }
        return report;
    }
    Rng rng(seed);
    std::uniform_int_distribution<Mask> pick(1, full_mask(n));
    std::vector<double> lam_a(n), lam_b(n);
    for (std::uint64_t t = 0; t < sample_budget; ++t) {
        const Mask b = pick(rng);
        if (cardinality(b) < 2) continue;
        Mask a = pick(rng) & b;
        if (a == 0 || a == b) continue;
        rule.evaluate(b, lam_b);
        rule.evaluate(a, lam_a);
        ++report.pairs_checked;
        if (!(total_on(lam_b, b) > 0.0)) {
            report.monotone = false;
            report.counterexample = MonotoneViolation{b, b, -1};
            return report;
        }
        if (auto bad = check_pair(lam_a, lam_b, a, b, tolerance)) {
            report.monotone = false;
            report.counterexample = bad;
            return report;
        }
    }
    return report;
}

} // namespace fbm
