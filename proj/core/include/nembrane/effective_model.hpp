#pragma once

#include <array>

#include "nembrane/qtensor.hpp"
#include "nembrane/sym3.hpp"

namespace nembrane {

// Symmetric 2x2 in-plane strain.
struct SymTensor2 {
    double e11 = 0.0;
    double e22 = 0.0;
    double e12 = 0.0;

    double trace() const { return e11 + e22; }

    // Full 2x2 Frobenius norm squared (e12 counted twice).
    double frobenius_sq() const {
        return e11 * e11 + e22 * e22 + 2.0 * e12 * e12;
    }
};

// The 3x3 matrix whose only nonzero entries are the transverse shears
// u_alpha / 2 induced by an in-plane vector u.  Its eigenvalues are
// { -|u|/2, 0, +|u|/2 }.
SymTensor3 shear_matrix(const std::array<double, 2>& u);

// Pointwise minimizer of t^2 + (lambda/2mu)(s + t)^2 over the transverse
// film strain t, for in-plane dilatation s: t* = -lambda/(lambda+2mu) s.
double optimal_k33_film(double e_trace, const MaterialParams& mat);

// Pointwise minimizer of (t - q33)^2 + (lambda/2mu) t^2 over the transverse
// bonding strain t: t* = 2mu/(lambda+2mu) q33.
double optimal_k33_nematic(double q33, const MaterialParams& mat);

// Membrane stiffness density after transverse relaxation:
// lambda/(lambda+2mu) (tr e)^2 + |e|_F^2.
double film_density(const SymTensor2& e, const MaterialParams& mat);

// Foundation density: squared reduced-metric distance of the shear matrix
// to the biaxial set.  Vanishes exactly on the plateau |u| <= 2/3 and grows
// quadratically far outside it.
double foundation_density(const std::array<double, 2>& u, const MaterialParams& mat,
                          double tol = kOptimalityTol);

// The order tensor realizing foundation_density(u).
QTensor optimal_Qbar(const std::array<double, 2>& u, const MaterialParams& mat,
                     double tol = kOptimalityTol);

// Foundation density together with its derivative in u.  Since the
// minimizing tensor is unique (the set is convex, the metric elliptic), the
// density is differentiable and d/du_a = u_a - 2 Q*_a3.  Passing the
// previous minimizer as warm start makes repeated nearby evaluations cheap.
struct FoundationEval {
    double density = 0.0;
    std::array<double, 2> grad{};
    QTensor qbar;
};

FoundationEval evaluate_foundation(const std::array<double, 2>& u, const MaterialParams& mat,
                                   double tol = kOptimalityTol,
                                   const SymTensor3* warm_start = nullptr);

// Limit membrane energy density: (film + foundation) / 2.
double e0_density(const SymTensor2& e, const std::array<double, 2>& u,
                  const MaterialParams& mat, double tol = kOptimalityTol);

}  // namespace nembrane
