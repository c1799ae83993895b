#include "cylfit/labels.hpp"

#include "cylfit/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace cylfit {

int segment_count(const std::vector<int>& seg) {
    int k = 0;
    for (int s : seg) k = std::max(k, s + 1);
    return k;
}

void MembershipMatrix::validate(double tol) const {
    if (segments < 1) throw DataError("membership: segment count must be >= 1");
    if (m.cols() != 2 * segments)
        throw DataError("membership: expected " + std::to_string(2 * segments) + " columns");
    for (int i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (int j = 0; j < m.cols(); ++j) {
            double x = m(i, j);
            if (!std::isfinite(x) || x < -tol || x > 1.0 + tol)
                throw DataError("membership: entry outside [0,1] at row " + std::to_string(i));
            sum += x;
        }
        if (std::abs(sum - 1.0) > tol)
            throw DataError("membership: row " + std::to_string(i) + " does not sum to 1");
    }
}

Eigen::MatrixXd segment_marginal(const MembershipMatrix& mm) {
    Eigen::MatrixXd w(mm.m.rows(), mm.segments);
    for (int k = 0; k < mm.segments; ++k)
        w.col(k) = mm.m.col(2 * k) + mm.m.col(2 * k + 1);
    return w;
}

Eigen::MatrixXd base_barrel_marginal(const MembershipMatrix& mm) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(mm.m.rows(), 2);
    for (int k = 0; k < mm.segments; ++k) {
        b.col(0) += mm.m.col(2 * k);     // barrel
        b.col(1) += mm.m.col(2 * k + 1); // base
    }
    return b;
}

MembershipMatrix one_hot_membership(const HardLabels& labels, int segments) {
    if (segments < 1) throw DataError("one_hot_membership: segment count must be >= 1");
    if (labels.seg.size() != labels.bb.size())
        throw DataError("one_hot_membership: seg/bb length mismatch");
    const int n = static_cast<int>(labels.seg.size());
    MembershipMatrix mm;
    mm.segments = segments;
    mm.m = Eigen::MatrixXd::Zero(n, 2 * segments);
    for (int i = 0; i < n; ++i) {
        int s = labels.seg[i], b = labels.bb[i];
        if (s < 0 || s >= segments)
            throw DataError("one_hot_membership: segment index " + std::to_string(s) +
                            " out of range at row " + std::to_string(i));
        if (b != kBarrel && b != kBase)
            throw DataError("one_hot_membership: barrel/base label missing at row " +
                            std::to_string(i));
        mm.m(i, 2 * s + b) = 1.0;
    }
    return mm;
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& m) {
    std::vector<int> out(m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        int best = 0;
        for (int j = 1; j < m.cols(); ++j)
            if (m(i, j) > m(i, best)) best = j;
        out[i] = best;
    }
    return out;
}

// ----------------------------------------------------------------------------
// Assignment.  Shortest-augmenting-path algorithm with potentials, O(n^3);
// afterwards the optimal permutation is made lexicographically smallest by
// fixing rows in order to the lowest column that still completes optimally.
// ----------------------------------------------------------------------------

namespace {

// One optimal assignment (row -> col) for a square matrix.
std::vector<int> assign_optimal(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
                if (minv[j] < delta) { delta = minv[j]; j1 = j; }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != 0);
        do { int j1 = way[j0]; p[j0] = p[j1]; j0 = j1; } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

double optimal_cost(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return 0.0;
    std::vector<int> m = assign_optimal(a);
    double c = 0.0;
    for (int i = 0; i < a.rows(); ++i) c += a(i, m[i]);
    return c;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& a, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
    Eigen::MatrixXd s(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            s(i, j) = a(rows[i], cols[j]);
    return s;
}

} // namespace

std::vector<int> hungarian_match(const Eigen::MatrixXd& cost) {
    if (cost.rows() != cost.cols())
        throw DataError("hungarian_match: cost matrix must be square");
    const int n = static_cast<int>(cost.rows());
    if (n == 0) return {};
    if (!cost.allFinite())
        throw DataError("hungarian_match: cost matrix has non-finite entries");

    const double total = optimal_cost(cost);
    const double eps = 1e-9 * (1.0 + std::abs(total));

    // Greedy lexicographic selection: row i takes the smallest column whose
    // choice still admits an optimal completion of the remaining rows.
    std::vector<int> result(n, -1);
    std::vector<int> free_cols(n);
    for (int j = 0; j < n; ++j) free_cols[j] = j;
    std::vector<int> rem_rows(n);
    for (int i = 0; i < n; ++i) rem_rows[i] = i;
    double fixed = 0.0;

    for (int i = 0; i < n; ++i) {
        rem_rows.erase(rem_rows.begin());
        bool placed = false;
        for (std::size_t jj = 0; jj < free_cols.size() && !placed; ++jj) {
            int j = free_cols[jj];
            double rest = optimal_cost(submatrix(cost, rem_rows, [&] {
                std::vector<int> c = free_cols;
                c.erase(c.begin() + jj);
                return c;
            }()));
            if (fixed + cost(i, j) + rest <= total + eps) {
                result[i] = j;
                fixed += cost(i, j);
                free_cols.erase(free_cols.begin() + jj);
                placed = true;
            }
        }
        if (!placed) // cannot happen for finite costs; defensive
            throw DataError("hungarian_match: failed to complete assignment");
    }
    return result;
}

int marginal_system_rank(int segments) {
    if (segments < 1) throw UsageError("marginal_system_rank: segment count must be >= 1");
    const int k = segments;
    Eigen::MatrixXd dw = Eigen::MatrixXd::Zero(2 * k, k);
    Eigen::MatrixXd db = Eigen::MatrixXd::Zero(2 * k, 2);
    for (int s = 0; s < k; ++s) {
        dw(2 * s, s) = 1.0;
        dw(2 * s + 1, s) = 1.0;
        db(2 * s, 0) = 1.0;
        db(2 * s + 1, 1) = 1.0;
    }
    Eigen::MatrixXd d = dw * dw.transpose() + db * db.transpose() +
                        Eigen::MatrixXd::Ones(2 * k, 2 * k);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double thresh = 1e-9 * sv(0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > thresh) ++rank;
    return rank;
}

} // namespace cylfit
