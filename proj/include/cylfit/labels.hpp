#pragma once

#include "cylfit/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace cylfit {

// Row-stochastic soft membership over 2K classes.  Column 2k is segment k's
// barrel class, column 2k+1 its base class, so marginalizing pairs of columns
// gives the segment membership and marginalizing alternating columns gives the
// barrel/base membership.
struct MembershipMatrix {
    Eigen::MatrixXd m; // N x 2K
    int segments = 0;  // K

    int rows() const { return static_cast<int>(m.rows()); }

    // Throws DataError unless every row is a distribution (entries in [0,1],
    // sum within tol of 1) and the column count equals 2*segments.
    void validate(double tol = 1e-9) const;
};

// N x K segment marginal: column k = M[:,2k] + M[:,2k+1].
Eigen::MatrixXd segment_marginal(const MembershipMatrix& m);

// N x 2 barrel/base marginal: column 0 sums even columns, column 1 odd ones.
Eigen::MatrixXd base_barrel_marginal(const MembershipMatrix& m);

// One-hot membership from hard labels.  seg in [0,K), bb in {0,1}; rows with
// seg == -1 or bb == -1 are rejected (hard labels must be complete here).
MembershipMatrix one_hot_membership(const HardLabels& labels, int segments);

// Per-row argmax over columns, ties to the lowest index.
std::vector<int> argmax_rows(const Eigen::MatrixXd& m);

// Minimum-cost assignment on a square cost matrix; returns row -> column.
// Among equal-cost optima the lexicographically smallest permutation wins.
// Throws DataError on non-finite entries.
std::vector<int> hungarian_match(const Eigen::MatrixXd& cost);

// Rank of the linear system tying a joint barrel/base-by-segment membership to
// its two marginals and the row-sum constraint.  Built as
//   D = Dw Dw^T + Db Db^T + 1 1^T,
// where Dw (2K x K) duplicates each segment column and Db (2K x 2) tiles the
// 2x2 identity; the rank is computed numerically via SVD (threshold
// 1e-9 * sigma_max).  Equals K+1, which is why the joint membership is not
// recoverable from the marginals alone for K > 1.
int marginal_system_rank(int segments);

} // namespace cylfit
