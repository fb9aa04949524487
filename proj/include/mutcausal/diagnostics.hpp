#pragma once

#include <vector>

#include <Eigen/Core>

namespace mutcausal {

// A diagnostic value with a flag for the degenerate or capped cases:
// zero-variance draws give NaN with `flagged` set; a super-efficient ESS is
// capped at N log10(N) with `flagged` set.
struct Diagnostic {
    double value = 0;
    bool flagged = false;
};

// Split-chain potential scale reduction. Needs >= 2 chains of >= 4 draws
// (throws InsufficientDraws).
Diagnostic split_r_hat(const std::vector<Eigen::VectorXd>& chains);

// Multi-chain effective sample size from the combined autocorrelation,
// summed over Geyer's initial positive (and monotone) sequence.
Diagnostic effective_sample_size(const std::vector<Eigen::VectorXd>& chains);

} // namespace mutcausal
