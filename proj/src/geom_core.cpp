#include "cylfit/geom_core.hpp"

#include "cylfit/error.hpp"
#include "cylfit/kdtree.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace cylfit {

namespace {

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(),
         v.z(), 0, -v.x(),
         -v.y(), v.x(), 0;
    return m;
}

// Fix the eigenvector sign so the largest-magnitude component is positive.
Vec3 canonical_sign(Vec3 v) {
    int imax = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] < 0.0) v = -v;
    return v;
}

// Solve A x = b for 3x3 A by Gaussian elimination with partial pivoting.
// Returns false when a pivot collapses (A numerically singular).
bool solve3(Mat3 A, Vec3 b, Vec3& x) {
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A(r, col)) > std::abs(A(piv, col))) piv = r;
        if (std::abs(A(piv, col)) < 1e-300) return false;
        if (piv != col) {
            A.row(piv).swap(A.row(col));
            std::swap(b[piv], b[col]);
            std::swap(perm[piv], perm[col]);
        }
        for (int r = col + 1; r < 3; ++r) {
            double f = A(r, col) / A(col, col);
            A.row(r) -= f * A.row(col);
            b[r] -= f * b[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= A(r, c) * x[c];
        x[r] = s / A(r, r);
    }
    return x.allFinite();
}

} // namespace

Vec3 canonical_direction(Vec3 v) { return canonical_sign(v); }

Mat3 rotation_to_z(const Vec3& axis) {
    const Vec3 e = axis.normalized();
    const double c = e.z(); // e . z
    if (c < -1.0 + 1e-9) {
        // Antipodal to +z: the minimal rotation is ill-defined, fall back to a
        // half-turn about x.
        Mat3 r;
        r << 1, 0, 0,
             0, -1, 0,
             0, 0, -1;
        return r;
    }
    const Vec3 v = e.cross(Vec3(0, 0, 1));
    const Mat3 vx = skew(v);
    return Mat3::Identity() + vx + vx * vx * (1.0 / (1.0 + c));
}

Vec2 project_to_sketch_plane(const Vec3& p, const Vec3& axis, const Vec3& center) {
    const Mat3 r = rotation_to_z(axis);
    return (r * (p - center)).head<2>();
}

ProjectedCloud project_cloud(const std::vector<Vec3>& points,
                             const std::vector<Vec3>& normals,
                             const Vec3& axis, const Vec3& center) {
    const Mat3 r = rotation_to_z(axis);
    ProjectedCloud out;
    out.points.reserve(points.size());
    out.normals.reserve(normals.size());
    out.normal_valid.reserve(normals.size());
    for (const Vec3& p : points)
        out.points.push_back((r * (p - center)).head<2>());
    for (const Vec3& n : normals) {
        Vec2 m = (r * n).head<2>();
        double len = m.norm();
        if (len < 1e-6) {
            // Normal parallel to the axis: no planar direction.
            out.normals.push_back(Vec2::Zero());
            out.normal_valid.push_back(0);
        } else {
            out.normals.push_back(m / len);
            out.normal_valid.push_back(1);
        }
    }
    return out;
}

// ----------------------------------------------------------------------------
// Symmetric 3x3 eigensolver.
//
// Eigenvalues from the characteristic polynomial (trigonometric Cardano form),
// eigenvector for the smallest eigenvalue from row cross products of
// (B - lambda I), then a few rounds of Rayleigh-quotient inverse iteration to
// polish.  The matrix is scaled to unit max-entry first so the tolerances
// below are relative.
// ----------------------------------------------------------------------------

SymEigen3 smallest_eigenvector_sym3(const Mat3& H) {
    SymEigen3 out;
    const double scale = H.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        out.vector = Vec3(1, 0, 0);
        out.values = {0, 0, 0};
        out.gap = 0.0;
        return out;
    }
    Mat3 B = (H + H.transpose()) / (2.0 * scale); // enforce symmetry, condition

    const double q = B.trace() / 3.0;
    const double p1 = B(0, 1) * B(0, 1) + B(0, 2) * B(0, 2) + B(1, 2) * B(1, 2);
    double l0, l1, l2; // ascending

    if (p1 < 1e-30) {
        // Effectively diagonal.
        double d[3] = {B(0, 0), B(1, 1), B(2, 2)};
        int order[3] = {0, 1, 2};
        std::sort(order, order + 3, [&](int a, int b) { return d[a] < d[b]; });
        l0 = d[order[0]];
        l1 = d[order[1]];
        l2 = d[order[2]];
        out.vector = Vec3::Unit(order[0]);
        out.values = {l0 * scale, l1 * scale, l2 * scale};
        out.gap = (l1 - l0) * scale;
        return out;
    }

    const double p2 = (B(0, 0) - q) * (B(0, 0) - q) + (B(1, 1) - q) * (B(1, 1) - q) +
                      (B(2, 2) - q) * (B(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const Mat3 A = (B - q * Mat3::Identity()) / p;
    double r = A.determinant() / 2.0;
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;

    l2 = q + 2.0 * p * std::cos(phi);
    l0 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    l1 = 3.0 * q - l0 - l2;

    // Eigenvector for l0: rows of (B - l0 I) span the orthogonal complement;
    // the largest pairwise cross product is the most stable choice.
    const Mat3 M = B - l0 * Mat3::Identity();
    const Vec3 r0 = M.row(0), r1 = M.row(1), r2 = M.row(2);
    Vec3 best = r0.cross(r1);
    double best_n = best.squaredNorm();
    for (const Vec3& c : {r0.cross(r2), r1.cross(r2)}) {
        double n = c.squaredNorm();
        if (n > best_n) { best = c; best_n = n; }
    }
    Vec3 v;
    if (best_n > 1e-24) {
        v = best / std::sqrt(best_n);
    } else {
        // Repeated smallest eigenvalue: any direction orthogonal to the
        // largest row works; if the matrix is (near) a multiple of I, pick x.
        int imax = 0;
        double rn[3] = {r0.squaredNorm(), r1.squaredNorm(), r2.squaredNorm()};
        for (int i = 1; i < 3; ++i)
            if (rn[i] > rn[imax]) imax = i;
        if (rn[imax] > 1e-24) {
            Vec3 row = M.row(imax);
            Vec3 c = row.cross(Vec3::UnitX());
            if (c.squaredNorm() < 1e-12) c = row.cross(Vec3::UnitY());
            v = c.normalized();
        } else {
            v = Vec3::UnitX();
        }
    }

    // Rayleigh-quotient inverse iteration.  Near-singular solves are exactly
    // the converged case; bail out then.
    for (int it = 0; it < 3; ++it) {
        double lam = v.dot(B * v);
        Vec3 w;
        if (!solve3(B - lam * Mat3::Identity(), v, w)) break;
        double wn = w.norm();
        if (!(wn > 1e-300) || !w.allFinite()) break;
        Vec3 vn = w / wn;
        if ((vn - v).norm() < 1e-15 || (vn + v).norm() < 1e-15) { v = vn; break; }
        v = vn;
    }
    // Guard against the iteration drifting to a different eigenpair (possible
    // when eigenvalues nearly coincide): keep v only if it still belongs to l0.
    if (std::abs(v.dot(B * v) - l0) > std::abs(l1 - l0) * 0.5 + 1e-12) {
        v = best_n > 1e-24 ? best.normalized() : v;
    }

    out.vector = canonical_sign(v);
    out.values = {l0 * scale, l1 * scale, l2 * scale};
    out.gap = (l1 - l0) * scale;
    return out;
}

// ----------------------------------------------------------------------------
// PCA normals.
// ----------------------------------------------------------------------------

NormalEstimate estimate_normals_pca(const std::vector<Vec3>& points, int k) {
    if (k < 3) throw UsageError("estimate_normals_pca: k must be >= 3");
    NormalEstimate out;
    const std::size_t n = points.size();
    out.normals.assign(n, Vec3::Zero());
    out.valid.assign(n, 0);
    if (n == 0) return out;

    KdTree3 tree(points);
    const int kk = std::min<int>(k, static_cast<int>(n));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> nb = tree.knn(points[i], kk);
        if (nb.size() < 3) continue;
        Vec3 mean = Vec3::Zero();
        for (int j : nb) mean += points[j];
        mean /= static_cast<double>(nb.size());
        Mat3 cov = Mat3::Zero();
        for (int j : nb) {
            Vec3 d = points[j] - mean;
            cov += d * d.transpose();
        }
        cov /= static_cast<double>(nb.size());

        SymEigen3 eig = smallest_eigenvector_sym3(cov);
        // Covariance is PSD with eigenvalues l0 <= l1 <= l2.  A valid surface
        // patch needs two spread directions: rank >= 2, i.e. l1 clearly > 0.
        double l1 = eig.values[1], l2 = eig.values[2];
        if (!(l2 > 0.0) || l1 <= 1e-10 * l2) continue;
        out.normals[i] = eig.vector; // canonical sign applied by the solver
        out.valid[i] = 1;
    }
    return out;
}

} // namespace cylfit
