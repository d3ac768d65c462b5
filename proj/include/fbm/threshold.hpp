#pragma once

#include <limits>
#include <span>
#include <vector>

#include "fbm/cascade.hpp"
#include "fbm/distribution.hpp"
#include "fbm/loadshare.hpp"
#include "fbm/quadrature.hpp"

namespace fbm {

/// Density b_m(t) of the sum of m independent Uniform(0,1); zero outside
/// [0, m]. Evaluated by the positive-term recursion
/// b_m(t) = [t b_{m-1}(t) + (m - t) b_{m-1}(t - 1)] / (m - 1), stable for
/// the m <= 30 range used here. b_0 is the unit atom at 0; asking for its
/// density throws std::domain_error.
double irwin_hall_pdf(int m, double t);

/// Probability density on [shift, shift + degree] proportional to
///   exp(-tilt * theta) * b_degree(theta - shift) / theta^power.
/// degree = 0 is the atom at `shift`, handled symbolically. The
/// normalizer is computed by quadrature with panels at the integer knots.
class MixingDensity {
  public:
    MixingDensity(int degree, double shift, int power, double tilt = 0.0);

    bool is_point_mass() const { return degree_ == 0; }
    double atom() const { return shift_; }
    double lower() const { return shift_; }
    double upper() const { return shift_ + degree_; }
    int degree() const { return degree_; }
    int power() const { return power_; }
    double tilt() const { return tilt_; }
    /// Interior kinks of the density: shift + 1, ..., shift + degree - 1.
    std::vector<double> knots() const;

    /// 1 / integral of the unnormalized kernel over the support (the atom's is 1).
    double normalizer() const { return normalizer_; }
    /// Density value; 0 off the support and 0 everywhere for an atom.
    double pdf(double theta) const;
    /// E[g(Theta)].
    template <class G>
    double expect(G &&g) const;

  private:
    double kernel(double theta) const;

    int degree_;
    double shift_;
    int power_;
    double tilt_;
    double normalizer_ = 1.0;
};

/// a_{k;n}: mixing density of the k-th order statistic of n unit
/// exponentials, b_{k-1}(theta - (n-k+1)) / theta^k on [n-k+1, n].
MixingDensity order_stat_mixing(int k, int n);

/// a_{l-k;n}: mixing density of the spacing X_{l;n} - X_{k;n},
/// b_{l-k-1}(theta - (n-l+1)) / theta^{l-k} on [n-l+1, n-k].
MixingDensity spacing_mixing(int k, int l, int n);

/// a_{k;n}(theta); k = 1 is an atom at n and reports 0 here.
double order_stat_mixing_density(int k, int n, double theta);

/// Density of the k-th order statistic of n unit exponentials.
double order_stat_marginal_density(int k, int n, double x);

/// Joint density of (X_{k;n}, X_{l;n}) for unit exponentials, by the direct
/// normalized formula.
double order_stat_joint_density_direct(int k, int l, int n, double x, double y);

/// The same density as a double gamma mixture over (Theta_1, Theta_2) with
/// mixing laws a_{k;n} and a_{l-k;n}.
double order_stat_joint_density_mixture(int k, int l, int n, double x, double y);

struct JointDensityPaths {
    double direct = 0.0;
    double mixture = 0.0;

    double relative_gap() const;
};

JointDensityPaths order_stat_joint_density(int k, int l, int n, double x, double y);

/// Conditional law of (Theta_1, Theta_2) given X = x, Y = y: the product of
/// two exponentially tilted shifted uniform sums.
struct TiltedConditional {
    MixingDensity theta1;
    MixingDensity theta2;

    double density(double t1, double t2) const { return theta1.pdf(t1) * theta2.pdf(t2); }
};

TiltedConditional tilted_conditional(int k, int l, int n, double x, double y);
double tilted_conditional_density(int k, int l, int n, double x, double y, double theta1, double theta2);

/// Multipliers attached to a breaking pattern by a monotone rule: for cycle
/// u the Phase-I multiplier a = lambda_{i_u}(N - C_u), and for every burst
/// member the bracket (L, U) with L s_u < x <= U s_u.
struct BurstBound {
    int component = -1;
    double lower = 0.0;
    double upper = 0.0;
};

struct CycleBound {
    int component = -1;
    double multiplier = 0.0;
    std::vector<BurstBound> members;
};

struct PatternBounds {
    std::vector<CycleBound> cycles;
};

PatternBounds pattern_bounds(const BreakingPattern &pattern, const LoadShareRule &rule);

/// Joint density of the Phase-I stresses and the pattern:
///   prod over burst members [F(U s_u) - F(L s_u)] * prod_u a f(a s_u).
/// Empty bursts contribute 1. Stresses must be strictly increasing.
double phase1_pattern_density(const PatternBounds &bounds, const StrengthDistribution &dist,
                              std::span<const double> stresses);

struct StressBox {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
};

/// Integral of the pattern density over s_1 < ... < s_f with s_u in
/// boxes[u] (all of [0, inf) when boxes is empty).
double pattern_probability(const PatternBounds &bounds, const StrengthDistribution &dist,
                           std::span<const StressBox> boxes = {});

/// Every structurally valid breaking pattern in which all n components fail
/// (parallel system), n <= 5.
std::vector<BreakingPattern> enumerate_parallel_patterns(int n);

/// P(S <= x) for a parallel bundle, summed over all patterns.
double parallel_strength_cdf(const LoadShareRule &rule, const StrengthDistribution &dist, double x);

/// E[Theta^m] / m! under a mixing density: the constant K in F(x) ~ K x^m.
double mixing_tail_constant(const MixingDensity &a, int m);

/// lim F(x) / x^n for the parallel bundle of n unit exponentials under a
/// monotone rule, from the small-load limit of every pattern density.
double parallel_exponential_tail_constant(const LoadShareRule &rule);

struct TailConstantEstimate {
    double constant = 0.0;   // K with the shape fixed
    double free_slope = 0.0; // slope of log F against log x, unconstrained
    std::size_t points = 0;
};

/// Estimates K in F(x) ~ K x^shape from the empirical lower tail, using the
/// order statistics whose empirical CDF lies in [lo_quantile, hi_quantile].
/// Throws if fewer than 100 points fall in the window.
TailConstantEstimate lower_tail_constant(std::span<const double> samples, double shape, double lo_quantile = 1e-5,
                                         double hi_quantile = 1e-3);

template <class G>
double MixingDensity::expect(G &&g) const {
    if (is_point_mass()) return g(shift_);
    const auto k = knots();
    return integrate([&](double t) { return g(t) * pdf(t); }, lower(), upper(), k);
}

} // namespace fbm
