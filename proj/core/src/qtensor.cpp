#include "nembrane/qtensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace nembrane {

namespace {

constexpr double kLower = -1.0 / 3.0;
constexpr double kUpper = 2.0 / 3.0;

void fix_sign(std::array<double, 3>& v) {
    for (double c : v) {
        if (std::abs(c) > 1e-14) {
            if (c < 0.0) {
                v = {-v[0], -v[1], -v[2]};
            }
            return;
        }
    }
}

}  // namespace

EigenDecomp eig_sym3(const SymTensor3& A) {
    Eigen::Matrix3d M;
    M << A.a11, A.a12, A.a13,
         A.a12, A.a22, A.a23,
         A.a13, A.a23, A.a33;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(M);

    EigenDecomp d;
    // SelfAdjointEigenSolver already sorts ascending.
    for (int i = 0; i < 3; ++i) {
        d.eigenvalues[i] = solver.eigenvalues()(i);
        d.eigenvectors[i] = {solver.eigenvectors()(0, i),
                             solver.eigenvectors()(1, i),
                             solver.eigenvectors()(2, i)};
        fix_sign(d.eigenvectors[i]);
    }
    return d;
}

bool is_biaxial(const QTensor& Q, double tol) {
    const EigenDecomp d = eig_sym3(Q.t);
    return d.eigenvalues[0] >= kLower - tol && d.eigenvalues[2] <= kUpper + tol;
}

bool is_uniaxial(const QTensor& Q, double tol) {
    const EigenDecomp d = eig_sym3(Q.t);
    return std::abs(d.eigenvalues[0] - kLower) <= tol &&
           std::abs(d.eigenvalues[2] - kUpper) <= tol;
}

QTensor from_director(const Director& n) {
    SymTensor3 s = SymTensor3::sym_outer(n.n, n.n);
    s.a11 -= 1.0 / 3.0;
    s.a22 -= 1.0 / 3.0;
    s.a33 -= 1.0 / 3.0;
    return QTensor::retraced(s);
}

Director lift_director(const QTensor& Q, double tol) {
    if (!is_uniaxial(Q, tol)) {
        const EigenDecomp d = eig_sym3(Q.t);
        throw NotUniaxial("lift_director: eigenvalues (" +
                          std::to_string(d.eigenvalues[0]) + ", " +
                          std::to_string(d.eigenvalues[1]) + ", " +
                          std::to_string(d.eigenvalues[2]) +
                          ") are not uniaxial within tol");
    }
    const EigenDecomp d = eig_sym3(Q.t);
    int best = 0;
    double best_gap = std::abs(d.eigenvalues[0] - kUpper);
    for (int i = 1; i < 3; ++i) {
        const double gap = std::abs(d.eigenvalues[i] - kUpper);
        if (gap < best_gap) {
            best = i;
            best_gap = gap;
        }
    }
    return Director(d.eigenvectors[best]);
}

std::array<double, 3> project_eigenvalues_polytope(const std::array<double, 3>& v) {
    // Coordinates clamp independently once the multiplier t is fixed:
    // x_i(t) = clamp(v_i - t); the sum is continuous and non-increasing in t,
    // so bisect on t until the sum vanishes.
    const auto sum_at = [&v](double t) {
        double s = 0.0;
        for (double vi : v) {
            s += std::clamp(vi - t, kLower, kUpper);
        }
        return s;
    };

    double lo = *std::min_element(v.begin(), v.end()) - kUpper - 1.0;
    double hi = *std::max_element(v.begin(), v.end()) - kLower + 1.0;
    // sum_at(lo) = +2, sum_at(hi) = -1; bisection keeps the bracket.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sum_at(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15) break;
    }
    const double t = 0.5 * (lo + hi);
    std::array<double, 3> x{std::clamp(v[0] - t, kLower, kUpper),
                            std::clamp(v[1] - t, kLower, kUpper),
                            std::clamp(v[2] - t, kLower, kUpper)};

    // Center the residual sum on the unclamped coordinates so the constraint
    // holds to machine precision.
    double resid = x[0] + x[1] + x[2];
    if (resid != 0.0) {
        int free_count = 0;
        for (double xi : x) {
            if (xi > kLower + 1e-13 && xi < kUpper - 1e-13) ++free_count;
        }
        if (free_count > 0) {
            const double shift = resid / free_count;
            for (double& xi : x) {
                if (xi > kLower + 1e-13 && xi < kUpper - 1e-13) xi -= shift;
            }
        }
    }
    return x;
}

QTensor project_QB_euclidean(const SymTensor3& A) {
    const EigenDecomp d = eig_sym3(A);
    const std::array<double, 3> lam = project_eigenvalues_polytope(d.eigenvalues);
    SymTensor3 out = SymTensor3::zero();
    for (int i = 0; i < 3; ++i) {
        out = out + lam[i] * SymTensor3::sym_outer(d.eigenvectors[i], d.eigenvectors[i]);
    }
    return QTensor::retraced(out);
}

double weighted_norm_sq(const SymTensor3& A, const MaterialParams& mat) {
    const double in_plane = A.a11 * A.a11 + A.a22 * A.a22 + 2.0 * A.a12 * A.a12;
    const double shear = 2.0 * (A.a13 * A.a13 + A.a23 * A.a23);
    return in_plane + shear + mat.w33() * A.a33 * A.a33;
}

QTensor project_QB_weighted(const SymTensor3& A, const MaterialParams& mat,
                            double tol, int max_iter, const SymTensor3* warm_start) {
    // Objective f(Q) = weighted_norm_sq(Q - A) over the biaxial set.  The
    // Frobenius-metric gradient is entrywise 2*(Q - A) except the 33 slot,
    // which is scaled by the metric weight; the Lipschitz constant is 2.
    const double w33 = mat.w33();
    const double step = 0.5;

    QTensor Q = warm_start ? project_QB_euclidean(*warm_start) : project_QB_euclidean(A);
    double residual = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        SymTensor3 g = (Q.t - A) * 2.0;
        g.a33 *= w33;
        const QTensor next = project_QB_euclidean(Q.t - g * step);
        residual = (next.t - Q.t).frobenius() / step;
        Q = next;
        if (residual <= tol) {
            return Q;
        }
    }
    throw NoConvergence(
        "project_QB_weighted: residual " + std::to_string(residual) +
        " above tol after " + std::to_string(max_iter) +
        " iterations (metric weight w33 = " + std::to_string(w33) + ")");
}

double dist2_weighted(const SymTensor3& A, const MaterialParams& mat, double tol) {
    const QTensor Q = project_QB_weighted(A, mat, tol);
    return weighted_norm_sq(A - Q.t, mat);
}

Director slerp_director(const Director& a, const Director& b, double t) {
    std::array<double, 3> bv = b.n;
    double dot = a.n[0] * bv[0] + a.n[1] * bv[1] + a.n[2] * bv[2];
    if (dot < 0.0) {
        bv = {-bv[0], -bv[1], -bv[2]};
        dot = -dot;
    }
    dot = std::min(dot, 1.0);

    const double angle = std::acos(dot);
    if (angle < 1e-8) {
        // Nearly parallel: linear blend then renormalize.
        return Director({a.n[0] + t * (bv[0] - a.n[0]),
                         a.n[1] + t * (bv[1] - a.n[1]),
                         a.n[2] + t * (bv[2] - a.n[2])});
    }
    const double s = std::sin(angle);
    const double ca = std::sin((1.0 - t) * angle) / s;
    const double cb = std::sin(t * angle) / s;
    return Director({ca * a.n[0] + cb * bv[0],
                     ca * a.n[1] + cb * bv[1],
                     ca * a.n[2] + cb * bv[2]});
}

}  // namespace nembrane
