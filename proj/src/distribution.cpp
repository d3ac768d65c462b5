#include "fbm/distribution.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbm {

Family parse_family(const std::string &name) {
    if (name == "exponential" || name == "exp") return Family::exponential;
    if (name == "weibull") return Family::weibull;
    if (name == "uniform") return Family::uniform;
    throw std::invalid_argument("unknown distribution family '" + name + "'");
}

std::string to_string(Family f) {
    switch (f) {
    case Family::exponential: return "exponential";
    case Family::weibull: return "weibull";
    case Family::uniform: return "uniform";
    }
    return "?";
}

StrengthDistribution::StrengthDistribution(Family f, double shape, std::vector<double> scales)
    : family_(f), shape_(shape), scales_(std::move(scales)) {
    if (!(shape_ > 0.0) || !std::isfinite(shape_))
        throw std::invalid_argument("strength distribution: shape must be positive");
    if (scales_.empty()) throw std::invalid_argument("strength distribution: no scale given");
    for (double s : scales_)
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::invalid_argument("strength distribution: scales must be positive");
}

StrengthDistribution StrengthDistribution::unit_exponential() {
    return {Family::exponential, 1.0, {1.0}};
}

StrengthDistribution StrengthDistribution::weibull(double shape, double scale) {
    return {Family::weibull, shape, {scale}};
}

StrengthDistribution StrengthDistribution::weibull(double shape, std::vector<double> scales) {
    return {Family::weibull, shape, std::move(scales)};
}

StrengthDistribution StrengthDistribution::uniform(double upper) {
    return {Family::uniform, 1.0, {upper}};
}

StrengthDistribution StrengthDistribution::make(Family family, double shape, double scale) {
    switch (family) {
    case Family::exponential: return {Family::exponential, 1.0, {scale}};
    case Family::weibull: return weibull(shape, scale);
    case Family::uniform: return uniform(scale);
    }
    throw std::invalid_argument("unknown family");
}

namespace {
// Cumulative hazard z with sf = exp(-z); only for exponential/weibull.
double hazard(double x, double scale, double shape) { return std::pow(x / scale, shape); }
} // namespace

double StrengthDistribution::cdf(int i, double x) const {
    if (x <= 0.0) return 0.0;
    if (family_ == Family::uniform) return std::min(1.0, x / scale(i));
    return -std::expm1(-hazard(x, scale(i), shape_));
}

double StrengthDistribution::sf(int i, double x) const {
    if (x <= 0.0) return 1.0;
    if (family_ == Family::uniform) return std::max(0.0, 1.0 - x / scale(i));
    return std::exp(-hazard(x, scale(i), shape_));
}

double StrengthDistribution::pdf(int i, double x) const {
    if (x < 0.0) return 0.0;
    const double sc = scale(i);
    if (family_ == Family::uniform) return x <= sc ? 1.0 / sc : 0.0;
    if (family_ == Family::exponential) return std::exp(-x / sc) / sc;
    if (x == 0.0) return shape_ == 1.0 ? 1.0 / sc : (shape_ < 1.0 ? std::numeric_limits<double>::infinity() : 0.0);
    const double z = hazard(x, sc, shape_);
    return shape_ / x * z * std::exp(-z);
}

double StrengthDistribution::log_cdf(int i, double x) const {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    if (family_ == Family::uniform) return x >= scale(i) ? 0.0 : std::log(x / scale(i));
    const double z = hazard(x, scale(i), shape_);
    // log(1 - e^{-z}) without cancellation at either end.
    return z < 0.6931471805599453 ? std::log(-std::expm1(-z)) : std::log1p(-std::exp(-z));
}

double StrengthDistribution::log_sf(int i, double x) const {
    if (x <= 0.0) return 0.0;
    if (family_ == Family::uniform)
        return x >= scale(i) ? -std::numeric_limits<double>::infinity() : std::log1p(-x / scale(i));
    return -hazard(x, scale(i), shape_);
}

double StrengthDistribution::sample(int i, Rng &rng) const {
    const double sc = scale(i);
    if (family_ == Family::uniform) {
        std::uniform_real_distribution<double> u(0.0, sc);
        double x = u(rng);
        while (x <= 0.0) x = u(rng);
        return x;
    }
    std::exponential_distribution<double> e(1.0);
    double z = e(rng);
    // exponential_distribution may return exactly 0; strengths must be positive.
    while (z <= 0.0) z = e(rng);
    if (family_ == Family::exponential || shape_ == 1.0) return sc * z;
    return sc * std::pow(z, 1.0 / shape_);
}

} // namespace fbm
