#include "mutcausal/conjugate.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mutcausal/errors.hpp"

namespace mutcausal {

namespace {

// Continued fraction for I_x(a, b) by the modified Lentz method; converges
// quickly for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1;
    const double qam = a - 1;
    double c = 1;
    double d = 1 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1) < eps) break;
    }
    return h;
}

double log_beta_density(double a, double b, double x) {
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1) * std::log(x) + (b - 1) * std::log1p(-x);
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0 && b > 0)) throw DomainError("incomplete beta needs a, b > 0");
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1) / (a + b + 2)) return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
    return 1 - std::exp(log_front) * beta_continued_fraction(b, a, 1 - x) / b;
}

double beta_quantile(double a, double b, double prob) {
    if (!(prob >= 0 && prob <= 1)) throw DomainError("probability must lie in [0, 1]");
    if (prob == 0) return 0;
    if (prob == 1) return 1;
    // Newton steps kept inside a shrinking bracket; bisect when Newton leaves it.
    double lo = 0, hi = 1;
    double x = a / (a + b);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = incomplete_beta(a, b, x) - prob;
        if (f == 0) return x;
        (f < 0 ? lo : hi) = x;
        const double slope = std::exp(log_beta_density(a, b, x));
        double next = x - f / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) < 1e-15 * std::max(1.0, x)) return next;
        x = next;
    }
    return x;
}

BetaPosterior beta_binomial_posterior(double prior_a, double prior_b, std::int64_t killed, std::int64_t total,
                                      double level) {
    if (!(prior_a > 0 && prior_b > 0) || !std::isfinite(prior_a) || !std::isfinite(prior_b))
        throw DomainError("Beta prior shapes must be positive and finite");
    if (killed < 0 || total < 0 || killed > total)
        throw DomainError(fmt::format("need 0 <= killed <= total, got killed={} total={}", killed, total));
    if (!(level > 0 && level < 1)) throw DomainError("credible level must lie in (0, 1)");
    BetaPosterior post;
    post.a = prior_a + static_cast<double>(killed);
    post.b = prior_b + static_cast<double>(total - killed);
    post.mean = post.a / (post.a + post.b);
    post.level = level;
    const double tail = (1 - level) / 2;
    post.lower = beta_quantile(post.a, post.b, tail);
    post.upper = beta_quantile(post.a, post.b, 1 - tail);
    return post;
}

} // namespace mutcausal
