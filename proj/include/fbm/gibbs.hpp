#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fbm/distribution.hpp"
#include "fbm/loadshare.hpp"
#include "fbm/parallel.hpp"
#include "fbm/subset.hpp"

namespace fbm {

/// One real per subset of {0..n-1}, indexed by the subset mask.
class SubsetTable {
  public:
    static constexpr int kMaxBits = 24;

    explicit SubsetTable(int n = 0);
    SubsetTable(int n, Eigen::VectorXd values);

    int n() const { return n_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    double operator[](Mask m) const { return values_[static_cast<Eigen::Index>(m)]; }
    double &operator[](Mask m) { return values_[static_cast<Eigen::Index>(m)]; }
    const Eigen::VectorXd &values() const { return values_; }
    Eigen::VectorXd &values() { return values_; }

  private:
    int n_;
    Eigen::VectorXd values_;
};

/// Raised when F_i(lambda s) is 0 or 1, so the log-odds are infinite and
/// the measure would violate the positivity condition P(A) > 0.
struct PositivityError : std::domain_error {
    using std::domain_error::domain_error;
};

/// log(Fbar_i(load) / F_i(load)).
double log_odds(const StrengthDistribution &dist, int i, double load);

/// sigma_i(A, s) = log(Fbar_i(lambda_i(A) s) / F_i(lambda_i(A) s)), i in A.
double log_odds(const Configuration &a, int i, double s, const LoadShareRule &rule, const StrengthDistribution &dist);

/// V(K) = sum_{A subset K} (-1)^{|K - A|} sigma(A) / |K|, V(empty) = 0.
/// Requires sigma(empty) = 0.
SubsetTable mobius_potentials(const SubsetTable &sigma, unsigned workers = 1);

/// U(B) = -sum_{A subset B} V(A). Requires V(empty) = 0.
SubsetTable mobius_energy(const SubsetTable &potentials, unsigned workers = 1);

/// V(A) = -sum_{B subset A} (-1)^{|A - B|} U(B).
SubsetTable energy_potentials(const SubsetTable &energy, unsigned workers = 1);

struct GibbsModel {
    int n = 0;
    double s = 0.0;
    SubsetTable sigma;      // sigma(A, s) = sum_{i in A} sigma_i(A, s)
    SubsetTable potentials; // V(K, s)
    SubsetTable energy;     // U(A, s)
    double logZ = 0.0;

    double log_probability(Mask a) const { return -energy[a] - logZ; }
    double probability(Mask a) const;
    Eigen::VectorXd probabilities() const;
};

inline constexpr int kMaxGibbsComponents = 20;

/// Exact Gibbs measure of the working set at load s per component.
/// Throws std::invalid_argument for n > 20 and PositivityError when some
/// F_i(lambda_i(A) s) is 0 or 1.
GibbsModel build_gibbs(double s, const LoadShareRule &rule, const StrengthDistribution &dist,
                       unsigned workers = default_workers());

/// log Z = log sum_A exp(-U(A)).
double log_partition(const SubsetTable &energy);

/// 0.5 sum_A |P(A) - Q(A)| for two Gibbs measures given by their energies.
double total_variation(const SubsetTable &energy_p, const SubsetTable &energy_q);

struct LMFFit {
    double p = 0.0;
    double p_prime = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<double> median_potentials; // v(k, s_p), k = 1..n at index k - 1
    double tv_error = 0.0;                 // energy from the fitted line on every V(K, s_p)
    double tv_error_median = 0.0;          // energy from the size-k medians v(k, s_p)
};

/// Least squares of V(K, s_{p'}) on V(K, s_p) over nonempty K, median
/// potentials, and the total-variation error of the approximate measure
///   U_LMF(A) = -a sum_{K subset A} V(K, s_p) - b (2^{|A|} - 1).
/// Throws std::domain_error when the reference potentials have zero variance.
LMFFit lmf_fit(const GibbsModel &reference, const GibbsModel &target, double p = 0.0, double p_prime = 0.0);

/// U_LMF built from the fitted line applied to every reference potential.
SubsetTable lmf_energy(const GibbsModel &reference, double slope, double intercept);

/// The same with each V(K, s_p) replaced by the median v(|K|, s_p).
SubsetTable lmf_median_energy(int n, std::span<const double> median_potentials, double slope, double intercept);

/// p-th percentile (0 < p < 100) with linear interpolation between order
/// statistics: h = (N - 1) p / 100, x_(floor h) + frac(h) (x_(floor h + 1) - x_(floor h)).
double strength_percentile(std::span<const double> samples, double p);

} // namespace fbm
