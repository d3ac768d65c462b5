#include "fbm/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "fbm/rng.hpp"

namespace fbm {

StructureFunction::StructureFunction(Kind k, int n, int rows, int cols)
    : kind_(k), n_(n), rows_(rows), cols_(cols) {
    if (n_ < 1 || n_ > kMaxComponents) throw std::invalid_argument("structure: component count must be in [1, 64]");
    if (kind_ == Kind::column_paths) {
        for (int c = 0; c < cols_; ++c) {
            Mask col = 0;
            for (int r = 0; r < rows_; ++r) col |= Mask{1} << (r * cols_ + c);
            paths_.push_back(col);
        }
    }
}

StructureFunction StructureFunction::parallel(int n) { return {Kind::parallel, n, 1, n}; }

StructureFunction StructureFunction::column_paths(int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("structure: grid dimensions must be positive");
    if (static_cast<long>(rows) * cols > kMaxComponents) throw std::invalid_argument("structure: grid larger than 64 nodes");
    return {Kind::column_paths, rows * cols, rows, cols};
}

StructureFunction StructureFunction::parse(const std::string &name, int rows, int cols) {
    if (name == "parallel") return parallel(rows * cols);
    if (name == "column-paths" || name == "columns") return column_paths(rows, cols);
    throw std::invalid_argument("unknown structure '" + name + "'");
}

std::vector<Mask> StructureFunction::minimal_path_sets() const {
    if (kind_ == Kind::column_paths) return paths_;
    std::vector<Mask> singles;
    for (int i = 0; i < n_; ++i) singles.push_back(Mask{1} << i);
    return singles;
}

void validate_strengths(std::span<const double> x, int n) {
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("strength vector length does not match the rule");
    for (double v : x)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("component strengths must be positive and finite");
}

namespace {

constexpr double kMonotoneSlack = 1e-9;

/// Shared cascade engine. `record` may be null for the strength-only path.
double run_cascade(std::span<const double> x, const LoadShareRule &rule, const StructureFunction &structure,
                   CascadeResult *record, std::vector<double> &buf0, std::vector<double> &buf1) {
    const int n = rule.size();
    Mask alive = full_mask(n);
    if (record) record->survivor_sets.push_back(alive);
    std::span<double> scratch[2] = {buf0, buf1};
    int which = 0;
    for (;;) {
        std::span<const double> lam = rule.shares(alive, scratch[which]);
        which ^= 1;

        double s = std::numeric_limits<double>::infinity();
        int first = -1;
        for_each_member(alive, [&](int i) {
            const double r = x[i] / lam[i];
            if (r < s) {
                s = r;
                first = i;
            }
        });
        Mask ties = 0;
        for_each_member(alive, [&](int i) {
            if (i != first && x[i] / lam[i] == s) ties |= Mask{1} << i;
        });
        alive &= ~(Mask{1} << first);
        FailureCycle *cycle = nullptr;
        if (record) {
            record->pattern.cycles.push_back({first, {}});
            record->phase1_stresses.push_back(s);
            cycle = &record->pattern.cycles.back();
        }

        std::span<const double> prev = lam;
        while (structure.works(alive)) {
            std::span<const double> cur = rule.shares(alive, scratch[which]);
            which ^= 1;
            Mask group = ties;
            ties = 0;
            for_each_member(alive, [&](int i) {
                if (cur[i] < prev[i] * (1.0 - kMonotoneSlack))
                    throw NonMonotoneRuleError("load-sharing rule is not monotone: a survivor's multiplier dropped after a failure");
                if (x[i] <= cur[i] * s) group |= Mask{1} << i;
            });
            if (group == 0) break;
            if (cycle) cycle->bursts.push_back(members(group));
            alive &= ~group;
            prev = cur;
        }
        if (record) record->survivor_sets.push_back(alive);
        if (!structure.works(alive)) {
            if (record) record->strength = s;
            return s;
        }
    }
}

void check_rule_structure(const LoadShareRule &rule, const StructureFunction &structure) {
    if (rule.size() != structure.size())
        throw std::invalid_argument("rule and structure disagree on the component count");
}

} // namespace

CascadeResult simulate_cascade(std::span<const double> x, const LoadShareRule &rule,
                               const StructureFunction &structure) {
    check_rule_structure(rule, structure);
    validate_strengths(x, rule.size());
    CascadeResult result;
    std::vector<double> b0(rule.size()), b1(rule.size());
    run_cascade(x, rule, structure, &result, b0, b1);
    return result;
}

double bundle_strength(std::span<const double> x, const LoadShareRule &rule, const StructureFunction &structure) {
    check_rule_structure(rule, structure);
    validate_strengths(x, rule.size());
    std::vector<double> b0(rule.size()), b1(rule.size());
    return run_cascade(x, rule, structure, nullptr, b0, b1);
}

std::vector<double> sample_bundle_strengths(const StrengthDistribution &dist, const LoadShareRule &rule,
                                            const StructureFunction &structure, std::uint64_t replicas,
                                            std::uint64_t seed, unsigned workers) {
    check_rule_structure(rule, structure);
    if (replicas < 1) throw std::invalid_argument("replicas must be at least 1");
    const int n = rule.size();
    if (dist.components() != 0 && dist.components() != n)
        throw std::invalid_argument("per-component scales do not match the component count");

    std::unique_ptr<LoadShareTable> table;
    const LoadShareRule *use = &rule;
    if (n <= 16 && dynamic_cast<const LoadShareTable *>(&rule) == nullptr) {
        table = std::make_unique<LoadShareTable>(LoadShareTable::tabulate(rule, workers));
        use = table.get();
    }

    std::vector<double> out(replicas);
    const std::uint64_t blocks = (replicas + kReplicaBlock - 1) / kReplicaBlock;
    parallel_for_blocks(blocks, workers, [&](std::size_t b) {
        Rng rng = block_rng(seed, b);
        std::vector<double> x(n), b0(n), b1(n);
        const std::uint64_t end = std::min<std::uint64_t>(replicas, (b + 1) * kReplicaBlock);
        for (std::uint64_t r = b * kReplicaBlock; r < end; ++r) {
            for (int i = 0; i < n; ++i) x[i] = dist.sample(i, rng);
            out[r] = run_cascade(x, *use, structure, nullptr, b0, b1);
        }
    });
    return out;
}

std::vector<double> chain_strength(std::span<const double> bundle_samples, ChainSpec chain, std::uint64_t draws,
                                   std::uint64_t seed) {
    if (chain.m < 1) throw std::invalid_argument("chain length must be at least 1");
    if (bundle_samples.empty()) throw std::invalid_argument("chain_strength: empty bundle sample pool");
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, bundle_samples.size() - 1);
    std::vector<double> out(draws);
    for (auto &v : out) {
        double m = std::numeric_limits<double>::infinity();
        for (int k = 0; k < chain.m; ++k) m = std::min(m, bundle_samples[pick(rng)]);
        v = m;
    }
    return out;
}

std::optional<std::uint64_t> cycles_to_failure_unchecked(std::span<const double> x, const LoadShareRule &rule,
                                                         const StructureFunction &structure, double s_star,
                                                         double a) {
    if (!(s_star > 0.0)) throw std::invalid_argument("peak load s_star must be positive");
    if (!(a > 0.0) || a > 1.0) throw std::invalid_argument("degradation factor must lie in (0, 1]");
    // Every strength scales by the same factor, so the cascade strength of
    // the degraded bundle after k-1 cycles is a^{k-1} S*.
    const double strength = bundle_strength(x, rule, structure);
    if (strength <= s_star) return 1;
    if (a == 1.0) return std::nullopt;
    double degraded = strength;
    std::uint64_t k = 1;
    while (degraded > s_star) {
        degraded *= a;
        ++k;
    }
    return k;
}

std::uint64_t cycles_to_failure(std::span<const double> x, const LoadShareRule &rule,
                                const StructureFunction &structure, double s_star, double a) {
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument("degradation factor a must lie in (0, 1): without degradation either the bundle "
                                    "fails in the first cycle or it never fails");
    return *cycles_to_failure_unchecked(x, rule, structure, s_star, a);
}

} // namespace fbm
