#pragma once

#include <array>
#include <cmath>

#include "nembrane/errors.hpp"

namespace nembrane {

// Symmetric 3x3 tensor stored by its six independent entries.
struct SymTensor3 {
    double a11 = 0.0;
    double a22 = 0.0;
    double a33 = 0.0;
    double a12 = 0.0;
    double a13 = 0.0;
    double a23 = 0.0;

    static SymTensor3 zero() { return {}; }

    static SymTensor3 diagonal(double d1, double d2, double d3) {
        return {d1, d2, d3, 0.0, 0.0, 0.0};
    }

    // Symmetric part of the rank-one product u v^T.
    static SymTensor3 sym_outer(const std::array<double, 3>& u,
                                const std::array<double, 3>& v) {
        return {u[0] * v[0],
                u[1] * v[1],
                u[2] * v[2],
                0.5 * (u[0] * v[1] + u[1] * v[0]),
                0.5 * (u[0] * v[2] + u[2] * v[0]),
                0.5 * (u[1] * v[2] + u[2] * v[1])};
    }

    double operator()(int i, int j) const {
        if (i > j) std::swap(i, j);
        if (i == 0) return (j == 0) ? a11 : (j == 1) ? a12 : a13;
        if (i == 1) return (j == 1) ? a22 : a23;
        return a33;
    }

    double trace() const { return a11 + a22 + a33; }

    // Full-matrix Frobenius norm squared; off-diagonals counted twice.
    double frobenius_sq() const {
        return a11 * a11 + a22 * a22 + a33 * a33 +
               2.0 * (a12 * a12 + a13 * a13 + a23 * a23);
    }

    double frobenius() const { return std::sqrt(frobenius_sq()); }

    SymTensor3 operator+(const SymTensor3& o) const {
        return {a11 + o.a11, a22 + o.a22, a33 + o.a33,
                a12 + o.a12, a13 + o.a13, a23 + o.a23};
    }

    SymTensor3 operator-(const SymTensor3& o) const {
        return {a11 - o.a11, a22 - o.a22, a33 - o.a33,
                a12 - o.a12, a13 - o.a13, a23 - o.a23};
    }

    SymTensor3 operator*(double s) const {
        return {a11 * s, a22 * s, a33 * s, a12 * s, a13 * s, a23 * s};
    }

    std::array<double, 3> apply(const std::array<double, 3>& x) const {
        return {a11 * x[0] + a12 * x[1] + a13 * x[2],
                a12 * x[0] + a22 * x[1] + a23 * x[2],
                a13 * x[0] + a23 * x[1] + a33 * x[2]};
    }
};

inline SymTensor3 operator*(double s, const SymTensor3& t) { return t * s; }

// Traceless symmetric 3x3 tensor (de Gennes order parameter).
// Construction rejects inputs whose trace exceeds 1e-12 in magnitude.
struct QTensor {
    SymTensor3 t;

    QTensor() = default;

    explicit QTensor(const SymTensor3& s) : t(s) {
        if (std::abs(s.trace()) > trace_tolerance()) {
            throw ValidationError("QTensor: trace " + std::to_string(s.trace()) +
                                  " exceeds tolerance 1e-12");
        }
    }

    static constexpr double trace_tolerance() { return 1e-12; }

    // Removes the exactly-computed trace/3 from each diagonal entry, then
    // constructs.  Intended for results of arithmetic that is traceless in
    // exact math but accumulates rounding.
    static QTensor retraced(SymTensor3 s) {
        const double m = s.trace() / 3.0;
        s.a11 -= m;
        s.a22 -= m;
        s.a33 -= m;
        return QTensor(s);
    }

    double operator()(int i, int j) const { return t(i, j); }
};

// Unit vector on S^2; directors are sign-equivalent (n and -n describe the
// same state) so consumers must not rely on orientation.
struct Director {
    std::array<double, 3> n{0.0, 0.0, 1.0};

    Director() = default;

    explicit Director(const std::array<double, 3>& v) : n(v) {
        const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if (!(len > 0.0) || !std::isfinite(len)) {
            throw ValidationError("Director: zero or non-finite vector");
        }
        n = {v[0] / len, v[1] / len, v[2] / len};
    }
};

// Isotropic Lame pair; the shear-coupling normalization is fixed to 1 so the
// foundation term carries no extra scale factor.
struct MaterialParams {
    double lambda = 1.0;
    double mu = 1.0;

    MaterialParams() = default;

    MaterialParams(double lambda_, double mu_) : lambda(lambda_), mu(mu_) {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw ValidationError("MaterialParams: lambda must be positive");
        }
        if (!(mu > 0.0) || !std::isfinite(mu)) {
            throw ValidationError("MaterialParams: mu must be positive");
        }
        if (!(2.0 * mu + 3.0 * lambda > 0.0)) {
            throw ValidationError("MaterialParams: 2*mu + 3*lambda must be positive");
        }
    }

    // Weight of the 33-component in the reduced metric.
    double w33() const { return lambda / (lambda + 2.0 * mu); }
};

// Result of a symmetric 3x3 eigendecomposition.  Eigenvalues ascend;
// eigenvector[i] pairs with eigenvalue[i]; each eigenvector is unit length
// with its first nonzero component positive.
struct EigenDecomp {
    std::array<double, 3> eigenvalues{};
    std::array<std::array<double, 3>, 3> eigenvectors{};
};

}  // namespace nembrane
