#pragma once

#include <cstdint>

namespace mutcausal {

// Beta posterior of a mutation score under a Beta prior and a Binomial kill
// count, with an equal-tailed credible interval.
struct BetaPosterior {
    double a = 1;
    double b = 1;
    double mean = 0.5;
    double level = 0.95;
    double lower = 0;
    double upper = 1;
};

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Inverse of incomplete_beta in x.
double beta_quantile(double a, double b, double prob);

// Throws DomainError unless a, b > 0, 0 <= killed <= total and level in (0, 1).
BetaPosterior beta_binomial_posterior(double prior_a, double prior_b, std::int64_t killed, std::int64_t total,
                                      double level);

} // namespace mutcausal
