#pragma once

#include <string>
#include <vector>

#include "fbm/rng.hpp"

namespace fbm {

enum class Family { exponential, weibull, uniform };

Family parse_family(const std::string &name);
std::string to_string(Family f);

/// Independent component strength laws. Weibull components share the shape
/// and may carry per-component scales; `exponential` is the unit-rate
/// exponential scaled by `scale`; `uniform` is Uniform(0, scale).
class StrengthDistribution {
  public:
    static StrengthDistribution unit_exponential();
    static StrengthDistribution weibull(double shape, double scale);
    static StrengthDistribution weibull(double shape, std::vector<double> scales);
    static StrengthDistribution uniform(double upper = 1.0);
    static StrengthDistribution make(Family family, double shape, double scale);

    Family family() const { return family_; }
    double shape() const { return shape_; }
    double scale(int i) const { return scales_.size() == 1 ? scales_[0] : scales_.at(i); }
    /// Number of per-component scales, or 0 when all components share one.
    int components() const { return scales_.size() == 1 ? 0 : static_cast<int>(scales_.size()); }

    double cdf(int i, double x) const;
    double sf(int i, double x) const;
    double pdf(int i, double x) const;
    double log_cdf(int i, double x) const;
    double log_sf(int i, double x) const;

    /// Draws one strength for component i; consumes exactly one variate.
    double sample(int i, Rng &rng) const;

  private:
    StrengthDistribution(Family f, double shape, std::vector<double> scales);

    Family family_;
    double shape_;
    std::vector<double> scales_;
};

} // namespace fbm
