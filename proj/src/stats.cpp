#include "fbm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "fbm/rng.hpp"

namespace fbm {

double KMCurve::operator()(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 1.0;
    return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

KMCurve kaplan_meier(std::span<const CensoredSample> samples) {
    if (samples.empty()) throw std::invalid_argument("kaplan_meier: empty sample");
    std::vector<CensoredSample> s(samples.begin(), samples.end());
    for (const auto &o : s)
        if (!(o.value > 0.0) || !std::isfinite(o.value)) throw std::invalid_argument("kaplan_meier: values must be positive");
    std::sort(s.begin(), s.end(), [](const CensoredSample &a, const CensoredSample &b) { return a.value < b.value; });

    KMCurve km;
    double surv = 1.0, greenwood = 0.0;
    std::size_t at_risk = s.size();
    for (std::size_t i = 0; i < s.size();) {
        const double t = s[i].value;
        std::size_t d = 0, c = 0;
        for (; i < s.size() && s[i].value == t; ++i) (s[i].censored ? c : d) += 1;
        if (d > 0) {
            surv *= 1.0 - static_cast<double>(d) / at_risk;
            if (d < at_risk) greenwood += static_cast<double>(d) / (static_cast<double>(at_risk) * (at_risk - d));
            const double var = surv > 0.0 ? surv * surv * greenwood : 0.0;
            const double half = 1.96 * std::sqrt(var);
            km.times.push_back(t);
            km.survival.push_back(surv);
            km.variance.push_back(var);
            km.lower.push_back(std::clamp(surv - half, 0.0, 1.0));
            km.upper.push_back(std::clamp(surv + half, 0.0, 1.0));
            km.at_risk.push_back(at_risk);
            km.deaths.push_back(d);
        }
        at_risk -= d + c;
    }
    km.all_censored = km.times.empty();
    return km;
}

double weibull_loglik(std::span<const CensoredSample> samples, double rho, double sigma) {
    double ll = 0.0;
    for (const auto &o : samples) {
        const double z = std::pow(o.value / sigma, rho);
        if (!o.censored) ll += std::log(rho / sigma) + (rho - 1.0) * std::log(o.value / sigma);
        ll -= z;
    }
    return ll;
}

namespace {

// Profile score and its derivative in the shape, on data scaled to max 1.
struct ProfileScore {
    std::span<const double> logy;
    std::span<const char> event;
    double r = 0.0;
    double sum_log_events = 0.0;

    // Returns {g, g'} at rho; also the sum of y^rho.
    std::pair<double, double> operator()(double rho, double *sum_w = nullptr) const {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (double l : logy) {
            const double w = std::exp(rho * l);
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        if (sum_w) *sum_w = s0;
        const double m1 = s1 / s0, m2 = s2 / s0;
        const double g = r / rho + sum_log_events - r * m1;
        const double dg = -r / (rho * rho) - r * (m2 - m1 * m1);
        return {g, dg};
    }
};

} // namespace

WeibullFit weibull_mle_censored(std::span<const CensoredSample> samples) {
    std::size_t events = 0;
    double mx = 0.0, mn = std::numeric_limits<double>::infinity();
    for (const auto &o : samples) {
        if (!(o.value > 0.0) || !std::isfinite(o.value))
            throw std::invalid_argument("weibull_mle_censored: values must be positive and finite");
        events += o.censored ? 0 : 1;
        mx = std::max(mx, o.value);
        mn = std::min(mn, o.value);
    }
    if (events < 2) throw std::invalid_argument("weibull_mle_censored: need at least 2 uncensored observations");
    if (mn == mx) throw std::invalid_argument("weibull_mle_censored: degenerate data (all values equal)");

    std::vector<double> logy;
    std::vector<char> event;
    double sle = 0.0;
    for (const auto &o : samples) {
        const double l = std::log(o.value / mx);
        logy.push_back(l);
        event.push_back(o.censored ? 0 : 1);
        if (!o.censored) sle += l;
    }
    ProfileScore score{logy, event, static_cast<double>(events), sle};
    const double tol = 1e-10;

    WeibullFit fit;
    // g is decreasing in rho with g -> +inf at 0; expand to a sign change.
    double lo = 1.0, hi = 1.0;
    double glo = score(lo).first, ghi = glo;
    int expand = 0;
    if (glo > 0.0) {
        while (ghi > 0.0 && expand++ < 200) {
            lo = hi;
            glo = ghi;
            hi *= 2.0;
            ghi = score(hi).first;
        }
    } else {
        while (glo < 0.0 && expand++ < 200) {
            hi = lo;
            ghi = glo;
            lo *= 0.5;
            glo = score(lo).first;
        }
    }
    auto report = [&](const std::string &why, double rho, double g) {
        std::ostringstream os;
        os << why << ": bracket [" << lo << ", " << hi << "], score " << glo << " / " << ghi << ", last rho " << rho
           << ", last score " << g;
        fit.diagnostics = os.str();
    };
    if (!(glo > 0.0 && ghi < 0.0) && std::abs(glo) > tol * events && std::abs(ghi) > tol * events) {
        report("no sign change found", hi, ghi);
        fit.rho = hi;
        fit.converged = false;
        return fit;
    }

    double rho = 0.5 * (lo + hi);
    double g = 0.0;
    for (int it = 1; it <= 200; ++it) {
        const auto [gv, dg] = score(rho);
        g = gv;
        fit.iterations = it;
        if (std::abs(g) < tol * events) {
            fit.converged = true;
            break;
        }
        (g > 0.0 ? lo : hi) = rho;
        double next = rho - g / dg;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * hi) {
            fit.converged = std::abs(g) < 1e-6 * events;
            rho = next;
            break;
        }
        rho = next;
    }
    if (!fit.converged) report("profile score did not reach tolerance", rho, g);
    double sum_w = 0.0;
    score(rho, &sum_w);
    fit.rho = rho;
    fit.sigma = mx * std::pow(sum_w / events, 1.0 / rho);
    fit.loglik = weibull_loglik(samples, fit.rho, fit.sigma);
    return fit;
}

WeibullPlot weibull_plot_points(std::span<const double> samples) {
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    std::vector<double> sf(x.size());
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sf[i] = 1.0 - (i + 1) / n;
    return weibull_plot_points(x, sf);
}

WeibullPlot weibull_plot_points(std::span<const double> x, std::span<const double> survival) {
    if (x.size() != survival.size()) throw std::invalid_argument("weibull_plot_points: length mismatch");
    WeibullPlot out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = survival[i];
        if (!(s > 0.0 && s < 1.0) || !(x[i] > 0.0)) {
            ++out.dropped;
            continue;
        }
        out.ln_x.push_back(std::log(x[i]));
        out.ln_neg_ln_sf.push_back(std::log(-std::log(s)));
    }
    return out;
}

WeibullPlot weibull_plot_points(const KMCurve &curve) { return weibull_plot_points(curve.times, curve.survival); }

TailFit lower_tail_slope(std::span<const double> samples, double lo, double hi) {
    if (!(lo > 0.0) || !(hi > lo) || !(hi < 1.0)) throw std::invalid_argument("lower_tail_slope: need 0 < lo < hi < 1");
    const std::size_t n = samples.size();
    const auto first = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lo * n)));
    const auto last = std::min(n - (n > 0 ? 1 : 0), static_cast<std::size_t>(std::floor(hi * n)));
    if (n == 0 || last < first || last - first + 1 < 100)
        throw InsufficientTailError("lower_tail_slope: fewer than 100 samples in the quantile window [" +
                                    std::to_string(lo) + ", " + std::to_string(hi) +
                                    "]; increase the replica count");
    std::vector<double> v(samples.begin(), samples.end());
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(last), v.end());
    std::sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(last));

    std::vector<double> xs, ys;
    for (std::size_t i = first; i <= last; ++i) {
        const double x = v[i - 1];
        if (!(x > 0.0)) continue;
        xs.push_back(std::log(x));
        ys.push_back(std::log(-std::log1p(-static_cast<double>(i) / n)));
    }
    const std::size_t m = xs.size();
    if (m < 100) throw InsufficientTailError("lower_tail_slope: fewer than 100 positive samples in the window");
    const Eigen::Map<const Eigen::ArrayXd> X(xs.data(), m), Y(ys.data(), m);
    const double mx = X.mean(), my = Y.mean();
    const double sxx = (X - mx).square().sum();
    if (!(sxx > 0.0)) throw std::domain_error("lower_tail_slope: tail window has no spread in x");
    TailFit fit;
    fit.slope = ((X - mx) * (Y - my)).sum() / sxx;
    fit.intercept = my - fit.slope * mx;
    const double rss = (Y - fit.intercept - fit.slope * X).square().sum();
    fit.stderr_slope = std::sqrt(rss / (m - 2) / sxx);
    fit.points = m;
    fit.lo = lo;
    fit.hi = hi;
    return fit;
}

double inflation_factor(double rho_g, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("inflation_factor: component shape must be positive");
    return rho_g / rho;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)> &cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == t) ++i;
        while (j < y.size() && y[j] == t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / x.size() - static_cast<double>(j) / y.size()));
    }
    return d;
}

std::vector<CensoredSample> synthetic_weibull_censored(double shape, double scale, std::size_t n,
                                                       std::size_t censored, std::uint64_t seed) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw std::invalid_argument("synthetic data: shape and scale must be positive");
    if (censored >= n) throw std::invalid_argument("synthetic data: need at least one uncensored value");
    Rng rng = block_rng(seed, 0);
    std::weibull_distribution<double> w(shape, scale);
    std::vector<double> x(n);
    for (auto &v : x) v = w(rng);
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    const double cut = sorted[n - censored - 1];
    std::vector<CensoredSample> out;
    out.reserve(n);
    for (double v : x) out.push_back(v > cut ? CensoredSample{cut, true} : CensoredSample{v, false});
    return out;
}

} // namespace fbm
