#include "fbm/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace fbm {

double irwin_hall_pdf(int m, double t) {
    if (m < 0) throw std::invalid_argument("irwin_hall_pdf: m must be non-negative");
    if (m == 0) throw std::domain_error("irwin_hall_pdf: b_0 is a point mass at 0 and has no density");
    if (!(t >= 0.0) || t > m) return 0.0;
    if (m == 1) return 1.0;
    // vals[j] holds b_k(t - j); b_1 uses the half-open indicator of [0, 1).
    std::vector<double> vals(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double u = t - j;
        vals[j] = (u >= 0.0 && u < 1.0) ? 1.0 : 0.0;
    }
    for (int k = 2; k <= m; ++k) {
        for (int j = 0; j + k <= m; ++j) {
            const double u = t - j;
            vals[j] = (u * vals[j] + (k - u) * vals[j + 1]) / (k - 1);
        }
    }
    return std::max(0.0, vals[0]);
}

MixingDensity::MixingDensity(int degree, double shift, int power, double tilt)
    : degree_(degree), shift_(shift), power_(power), tilt_(tilt) {
    if (degree_ < 0) throw std::invalid_argument("mixing density: degree must be non-negative");
    if (degree_ > 0 && shift_ <= 0.0 && power_ > 0)
        throw std::invalid_argument("mixing density: support must be positive when dividing by theta^power");
    if (degree_ == 0) return;
    const auto k = knots();
    const double mass = integrate([this](double t) { return kernel(t); }, lower(), upper(), k);
    if (!(mass > 0.0) || !std::isfinite(mass)) throw std::runtime_error("mixing density: degenerate normalizer");
    normalizer_ = 1.0 / mass;
}

std::vector<double> MixingDensity::knots() const {
    std::vector<double> k;
    for (int j = 1; j < degree_; ++j) k.push_back(shift_ + j);
    return k;
}

double MixingDensity::kernel(double theta) const {
    const double u = theta - shift_;
    if (u < 0.0 || u > degree_) return 0.0;
    // Tilt measured from the left end keeps the kernel O(1) for large tilts.
    return std::exp(-tilt_ * u) * irwin_hall_pdf(degree_, u) / std::pow(theta, power_);
}

double MixingDensity::pdf(double theta) const {
    if (is_point_mass()) return 0.0;
    return kernel(theta) * normalizer_;
}

MixingDensity order_stat_mixing(int k, int n) {
    if (k < 1 || k > n) throw std::invalid_argument("order_stat_mixing: need 1 <= k <= n");
    return {k - 1, static_cast<double>(n - k + 1), k};
}

MixingDensity spacing_mixing(int k, int l, int n) {
    if (k < 1 || l <= k || l > n) throw std::invalid_argument("spacing_mixing: need 1 <= k < l <= n");
    return {l - k - 1, static_cast<double>(n - l + 1), l - k};
}

double order_stat_mixing_density(int k, int n, double theta) { return order_stat_mixing(k, n).pdf(theta); }

namespace {

double log_factorial(int m) { return std::lgamma(m + 1.0); }

void check_pair(int k, int l, int n) {
    if (k < 1 || l <= k || l > n) throw std::invalid_argument("order statistics: need 1 <= k < l <= n");
}

// log(1 - e^{-t}) for t > 0.
double log1mexp(double t) { return t < 0.6931471805599453 ? std::log(-std::expm1(-t)) : std::log1p(-std::exp(-t)); }

} // namespace

double order_stat_marginal_density(int k, int n, double x) {
    if (k < 1 || k > n) throw std::invalid_argument("order statistics: need 1 <= k <= n");
    if (!(x > 0.0)) return 0.0;
    const double logc = log_factorial(n) - log_factorial(k - 1) - log_factorial(n - k);
    double v = logc - (n - k + 1) * x;
    if (k > 1) v += (k - 1) * log1mexp(x);
    return std::exp(v);
}

double order_stat_joint_density_direct(int k, int l, int n, double x, double y) {
    check_pair(k, l, n);
    if (!(x > 0.0) || !(y > x)) return 0.0;
    const double logc = log_factorial(n) - log_factorial(k - 1) - log_factorial(l - k - 1) - log_factorial(n - l);
    // F(x)^{k-1} f(x) (F(y) - F(x))^{l-k-1} f(y) Fbar(y)^{n-l}
    double v = logc - x - (n - l + 1) * y;
    if (k > 1) v += (k - 1) * log1mexp(x);
    if (l - k > 1) v += (l - k - 1) * (-x + log1mexp(y - x));
    return std::exp(v);
}

double order_stat_joint_density_mixture(int k, int l, int n, double x, double y) {
    check_pair(k, l, n);
    if (!(x > 0.0) || !(y > x)) return 0.0;
    const double d = y - x;
    const MixingDensity a1 = order_stat_mixing(k, n);
    const MixingDensity a2 = spacing_mixing(k, l, n);
    // Gamma(shape j, rate theta) density at t.
    auto gamma_pdf = [](int j, double theta, double t) {
        return std::exp(j * std::log(theta) + (j - 1) * std::log(t) - theta * t - log_factorial(j - 1));
    };
    const double first = a1.expect([&](double th) { return gamma_pdf(k, th, x); });
    const double second = a2.expect([&](double th) { return gamma_pdf(l - k, th, d); });
    return first * second;
}

double JointDensityPaths::relative_gap() const {
    const double scale = std::max(std::abs(direct), std::abs(mixture));
    return scale == 0.0 ? 0.0 : std::abs(direct - mixture) / scale;
}

JointDensityPaths order_stat_joint_density(int k, int l, int n, double x, double y) {
    return {order_stat_joint_density_direct(k, l, n, x, y), order_stat_joint_density_mixture(k, l, n, x, y)};
}

TiltedConditional tilted_conditional(int k, int l, int n, double x, double y) {
    check_pair(k, l, n);
    if (!(x >= 0.0) || !(y >= x)) throw std::invalid_argument("tilted_conditional: need 0 <= x <= y");
    return {MixingDensity(k - 1, static_cast<double>(n - k + 1), 0, x),
            MixingDensity(l - k - 1, static_cast<double>(n - l + 1), 0, y - x)};
}

double tilted_conditional_density(int k, int l, int n, double x, double y, double theta1, double theta2) {
    return tilted_conditional(k, l, n, x, y).density(theta1, theta2);
}

PatternBounds pattern_bounds(const BreakingPattern &pattern, const LoadShareRule &rule) {
    const int n = rule.size();
    pattern.components(n);
    PatternBounds out;
    std::vector<double> lam(n), lower(n), upper(n);
    Mask alive = full_mask(n);
    for (const auto &cycle : pattern.cycles) {
        if (!contains(alive, cycle.phase1)) throw std::invalid_argument("pattern_bounds: malformed pattern");
        rule.evaluate(alive, lam);
        CycleBound cb{cycle.phase1, lam[cycle.phase1], {}};
        Mask before = 0;
        Mask removed = Mask{1} << cycle.phase1;
        for (const auto &group : cycle.bursts) {
            if ((alive & ~removed) == 0) throw std::invalid_argument("pattern_bounds: burst after every component failed");
            rule.evaluate(alive & ~before, lower);
            rule.evaluate(alive & ~removed, upper);
            Mask g = 0;
            for (int i : group) {
                if (lower[i] > upper[i] * (1.0 + 1e-12))
                    throw NonMonotoneRuleError("pattern_bounds: rule is not monotone (L > U)");
                cb.members.push_back({i, lower[i], upper[i]});
                g |= Mask{1} << i;
            }
            before = removed;
            removed |= g;
        }
        alive &= ~removed;
        out.cycles.push_back(std::move(cb));
    }
    return out;
}

namespace {

double cycle_factor(const CycleBound &c, const StrengthDistribution &dist, double s) {
    double v = c.multiplier * dist.pdf(c.component, c.multiplier * s);
    for (const auto &m : c.members) v *= dist.cdf(m.component, m.upper * s) - dist.cdf(m.component, m.lower * s);
    return v;
}

// Integral over lower < s_u < ... < s_f of prod_u factor(u, s_u), s_u in boxes[u].
// Only the outermost level is adaptive: an adaptive inner rule is not smooth
// in its limits and would force the outer level to subdivide without end.
double simplex_integral(const std::function<double(std::size_t, double)> &factor, std::size_t cycles,
                        std::span<const StressBox> boxes, std::size_t u, double lower) {
    if (u == cycles) return 1.0;
    const StressBox box = boxes.empty() ? StressBox{} : boxes[u];
    const double lo = std::max(lower, box.lo);
    if (!(box.hi > lo)) return 0.0;
    auto integrand = [&](double s) {
        const double f = factor(u, s);
        return f == 0.0 ? 0.0 : f * simplex_integral(factor, cycles, boxes, u + 1, s);
    };
    if (u == 0) return integrate(integrand, lo, box.hi, {}, 1e-10);
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, box.hi, 0);
}

void enumerate(Mask remaining, FailureCycle &cycle, BreakingPattern &current, std::vector<BreakingPattern> &out);

void start_cycles(Mask remaining, BreakingPattern &current, std::vector<BreakingPattern> &out) {
    if (remaining == 0) {
        out.push_back(current);
        return;
    }
    for_each_member(remaining, [&](int i) {
        FailureCycle c{i, {}};
        enumerate(remaining & ~(Mask{1} << i), c, current, out);
    });
}

// Either close the cycle here or append one more nonempty burst group.
void enumerate(Mask remaining, FailureCycle &cycle, BreakingPattern &current, std::vector<BreakingPattern> &out) {
    current.cycles.push_back(cycle);
    start_cycles(remaining, current, out);
    current.cycles.pop_back();
    for (Mask g = remaining; g != 0; g = (g - 1) & remaining) {
        cycle.bursts.push_back(members(g));
        enumerate(remaining & ~g, cycle, current, out);
        cycle.bursts.pop_back();
    }
}

} // namespace

double phase1_pattern_density(const PatternBounds &bounds, const StrengthDistribution &dist,
                              std::span<const double> stresses) {
    if (stresses.size() != bounds.cycles.size())
        throw std::invalid_argument("phase1_pattern_density: need one stress per cycle");
    for (std::size_t u = 0; u < stresses.size(); ++u) {
        if (!(stresses[u] > 0.0)) throw std::invalid_argument("phase1_pattern_density: stresses must be positive");
        if (u > 0 && !(stresses[u] > stresses[u - 1]))
            throw std::invalid_argument("phase1_pattern_density: stresses must be strictly increasing");
    }
    double v = 1.0;
    for (std::size_t u = 0; u < stresses.size(); ++u) v *= cycle_factor(bounds.cycles[u], dist, stresses[u]);
    return v;
}

double pattern_probability(const PatternBounds &bounds, const StrengthDistribution &dist,
                           std::span<const StressBox> boxes) {
    if (!boxes.empty() && boxes.size() != bounds.cycles.size())
        throw std::invalid_argument("pattern_probability: need one box per cycle");
    auto factor = [&](std::size_t u, double s) { return cycle_factor(bounds.cycles[u], dist, s); };
    return simplex_integral(factor, bounds.cycles.size(), boxes, 0, 0.0);
}

std::vector<BreakingPattern> enumerate_parallel_patterns(int n) {
    if (n < 1 || n > 5) throw std::invalid_argument("pattern enumeration limited to 1 <= n <= 5");
    std::vector<BreakingPattern> out;
    BreakingPattern current;
    start_cycles(full_mask(n), current, out);
    return out;
}

double parallel_strength_cdf(const LoadShareRule &rule, const StrengthDistribution &dist, double x) {
    if (!(x > 0.0)) return 0.0;
    double total = 0.0;
    for (const auto &p : enumerate_parallel_patterns(rule.size())) {
        const PatternBounds b = pattern_bounds(p, rule);
        std::vector<StressBox> boxes(b.cycles.size(), StressBox{0.0, x});
        total += pattern_probability(b, dist, boxes);
    }
    return total;
}

double mixing_tail_constant(const MixingDensity &a, int m) {
    if (m < 1) throw std::invalid_argument("mixing_tail_constant: shape must be positive");
    return a.expect([m](double t) { return std::pow(t, m); }) / std::exp(log_factorial(m));
}

double parallel_exponential_tail_constant(const LoadShareRule &rule) {
    // As s -> 0: a f(a s) -> a and F(U s) - F(L s) -> (U - L) s, so a pattern
    // contributes c prod_u s_u^{m_u} over 0 < s_1 < ... < s_f < 1, which
    // integrates to c / prod_u (sum_{v <= u} (m_v + 1)).
    double total = 0.0;
    for (const auto &p : enumerate_parallel_patterns(rule.size())) {
        const PatternBounds b = pattern_bounds(p, rule);
        double term = 1.0, exponent = 0.0;
        for (const auto &c : b.cycles) {
            term *= c.multiplier;
            for (const auto &m : c.members) term *= m.upper - m.lower;
            exponent += static_cast<double>(c.members.size()) + 1.0;
            term /= exponent;
        }
        total += term;
    }
    return total;
}

TailConstantEstimate lower_tail_constant(std::span<const double> samples, double shape, double lo_quantile,
                                         double hi_quantile) {
    if (!(shape > 0.0)) throw std::invalid_argument("lower_tail_constant: shape must be positive");
    if (!(lo_quantile > 0.0) || !(hi_quantile > lo_quantile) || hi_quantile >= 1.0)
        throw std::invalid_argument("lower_tail_constant: need 0 < lo < hi < 1");
    const std::size_t n = samples.size();
    const auto first = static_cast<std::size_t>(std::ceil(lo_quantile * n));
    const auto last = std::min(n, static_cast<std::size_t>(std::floor(hi_quantile * n)));
    if (last < first || last - first + 1 < 100 || first < 1)
        throw std::invalid_argument("lower_tail_constant: fewer than 100 samples in the tail window; run more replicas");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(last), sorted.end());
    std::sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(last));

    double sum_resid = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t i = first; i <= last; ++i) {
        const double x = sorted[i - 1];
        if (!(x > 0.0)) continue;
        const double lx = std::log(x);
        const double ly = std::log(static_cast<double>(i) / n);
        sum_resid += ly - shape * lx;
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 100) throw std::invalid_argument("lower_tail_constant: fewer than 100 positive samples in the tail window");
    TailConstantEstimate est;
    est.points = m;
    est.constant = std::exp(sum_resid / m);
    const double denom = m * sxx - sx * sx;
    est.free_slope = denom > 0.0 ? (m * sxy - sx * sy) / denom : std::numeric_limits<double>::quiet_NaN();
    return est;
}

} // namespace fbm
