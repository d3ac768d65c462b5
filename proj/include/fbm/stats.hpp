#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fbm {

struct CensoredSample {
    double value = 0.0;
    bool censored = false; // right-censored at value
};

/// Product-limit curve at the distinct event times. Ties put deaths before
/// censorings: a censoring at t is still at risk at t. Bands are
/// S +/- 1.96 sqrt(Greenwood variance), clipped to [0, 1].
struct KMCurve {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<double> variance;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::size_t> at_risk;
    std::vector<std::size_t> deaths;
    bool all_censored = false; // no events: S = 1 everywhere

    /// Right-continuous step function value S(t).
    double operator()(double t) const;
};

KMCurve kaplan_meier(std::span<const CensoredSample> samples);

struct WeibullFit {
    double rho = 0.0;
    double sigma = 0.0;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string diagnostics; // bracket and derivative when not converged
};

/// Right-censored Weibull maximum likelihood. The scale is profiled out in
/// closed form; the shape solves the profile score equation by Newton steps
/// kept inside an expanding-then-shrinking bracket, to |score| / r < 1e-10
/// with r the number of events. Throws std::invalid_argument with fewer
/// than two events or when every value is equal.
WeibullFit weibull_mle_censored(std::span<const CensoredSample> samples);

/// Right-censored Weibull log-likelihood.
double weibull_loglik(std::span<const CensoredSample> samples, double rho, double sigma);

/// Points (ln x, ln(-ln S)) of a Weibull probability plot.
struct WeibullPlot {
    std::vector<double> ln_x;
    std::vector<double> ln_neg_ln_sf;
    std::size_t dropped = 0; // survival values of 0 or 1
};

/// From a complete sample, with S = 1 - i/N at the i-th order statistic.
WeibullPlot weibull_plot_points(std::span<const double> samples);
/// From explicit (x, survival) pairs.
WeibullPlot weibull_plot_points(std::span<const double> x, std::span<const double> survival);
WeibullPlot weibull_plot_points(const KMCurve &curve);

/// Raised when a tail window holds too few order statistics.
struct InsufficientTailError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct TailFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    std::size_t points = 0;
    double lo = 0.0;
    double hi = 0.0;
};

/// OLS of ln(-ln(1 - i/N)) on ln x_(i) over the order statistics with
/// empirical quantile i/N in [lo, hi]. Needs at least 100 points.
TailFit lower_tail_slope(std::span<const double> samples, double lo = 1e-5, double hi = 1e-3);

/// k = rho_g / rho. For a coherent system of Weibull(rho) components k is
/// the size of the smallest cut set.
double inflation_factor(double rho_g, double rho);

/// sup_x |F_n(x) - F(x)|.
double ks_distance(std::span<const double> samples, const std::function<double(double)> &cdf);
/// sup_x |F_n(x) - G_m(x)|.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// n Weibull(shape, scale) draws with the `censored` largest values replaced
/// by right-censorings at the largest remaining event (type II censoring).
std::vector<CensoredSample> synthetic_weibull_censored(double shape, double scale, std::size_t n,
                                                       std::size_t censored, std::uint64_t seed);

/// Finite partition of [0, inf) by increasing positive cut points:
/// cells [0, c_1), [c_1, c_2), ..., [c_m, inf).
class Partition {
  public:
    explicit Partition(std::vector<double> cuts);

    std::size_t cells() const { return cuts_.size() + 1; }
    const std::vector<double> &cuts() const { return cuts_; }
    double left(std::size_t j) const { return j == 0 ? 0.0 : cuts_[j - 1]; }
    double right(std::size_t j) const;
    std::size_t cell_of(double x) const;
    /// Cells that can hold the observation: the cell of an event, every cell
    /// meeting (x, inf) for a right-censoring.
    std::vector<int> cell_set(const CensoredSample &obs) const;

  private:
    std::vector<double> cuts_;
};

struct DirichletComponent {
    std::vector<int> counts;   // assignment vector, totals the observation count
    Eigen::VectorXd parameter; // prior weights + counts
    double weight = 0.0;
};

struct PBDPosterior {
    Eigen::VectorXd prior;
    std::vector<DirichletComponent> mixture; // ordered by counts
    bool exact = true;
    double assignments = 0.0; // size of the assignment space
};

inline constexpr double kPbdExactLimit = 1e5;

/// Prior weights mass * P_base(cell j) for a Weibull(shape, scale) base.
Eigen::VectorXd pbd_prior(const Partition &partition, double shape, double scale, double mass);

/// Posterior given each observation's set of possible cells. Mixture
/// weights are proportional to prod_j alpha_j (alpha_j + 1) ... (alpha_j + n_j - 1),
/// the sequential urn probabilities of the assignment. Exact enumeration up
/// to 10^5 assignments, otherwise `draws` sequentially sampled assignments
/// with importance weights from a fixed seed.
PBDPosterior pbd_posterior(const Eigen::VectorXd &prior, const std::vector<std::vector<int>> &cell_sets,
                           std::uint64_t seed = 1, std::size_t draws = 100000);

PBDPosterior pbd_posterior(const Partition &partition, double shape, double scale, double mass,
                           std::span<const CensoredSample> observations, std::uint64_t seed = 1,
                           std::size_t draws = 100000);

} // namespace fbm
