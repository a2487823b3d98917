#pragma once

#include <array>

#include "nembrane/sym3.hpp"

namespace nembrane {

// Default tolerance for membership tests on the order-parameter sets.
inline constexpr double kMembershipTol = 1e-8;

// Default first-order optimality tolerance for the weighted projection.
inline constexpr double kOptimalityTol = 1e-8;

// Iteration cap for the weighted projection; hitting it throws NoConvergence.
inline constexpr int kProjectionMaxIter = 100000;

// Eigendecomposition of a symmetric 3x3 tensor.  Eigenvalues sorted
// ascending, eigenvectors unit length and pairwise orthogonal, sign fixed by
// making the first component larger than 1e-14 in magnitude positive.
EigenDecomp eig_sym3(const SymTensor3& A);

// Membership in the biaxial set: all eigenvalues within [-1/3, 2/3] up to tol.
bool is_biaxial(const QTensor& Q, double tol = kMembershipTol);

// Membership in the uniaxial subset: largest eigenvalue 2/3 and smallest
// -1/3 within tol (the middle one is then forced by tracelessness).
bool is_uniaxial(const QTensor& Q, double tol = kMembershipTol);

// Uniaxial tensor n (x) n - I/3 for a unit director n.
QTensor from_director(const Director& n);

// Recovers a director from a uniaxial tensor: the eigenvector whose
// eigenvalue is nearest 2/3.  Throws NotUniaxial when is_uniaxial fails.
Director lift_director(const QTensor& Q, double tol = kMembershipTol);

// Euclidean projection of (v1,v2,v3) onto the eigenvalue polytope
// { sum x_i = 0, -1/3 <= x_i <= 2/3 }: clamped coordinates with a scalar
// multiplier found by bisection.  Result sums to zero within 1e-12.
std::array<double, 3> project_eigenvalues_polytope(const std::array<double, 3>& v);

// Euclidean (Frobenius) projection onto the biaxial set: eigendecompose,
// project the spectrum onto the polytope, reassemble in the same frame.
QTensor project_QB_euclidean(const SymTensor3& A);

// Reduced metric: |A_ab|^2 + 2|A_a3|^2 + lambda/(lambda+2mu) A_33^2, where
// the in-plane block is a full 2x2 Frobenius norm (a12 counted twice).
double weighted_norm_sq(const SymTensor3& A, const MaterialParams& mat);

// Projection onto the biaxial set in the reduced metric, by projected
// gradient with fixed step 1/L (L = 2, the largest metric weight times 2
// from the quadratic).  Stops when the gradient-mapping residual falls
// below tol; throws NoConvergence at the iteration cap, which in practice
// signals ill-conditioned weights (lambda/(lambda+2mu) ~ 0).  A warm start
// near the solution cuts the iteration count sharply, so callers that
// project slowly-varying inputs should pass their previous result.
QTensor project_QB_weighted(const SymTensor3& A, const MaterialParams& mat,
                            double tol = kOptimalityTol,
                            int max_iter = kProjectionMaxIter,
                            const SymTensor3* warm_start = nullptr);

// Squared reduced-metric distance to the biaxial set.
double dist2_weighted(const SymTensor3& A, const MaterialParams& mat,
                      double tol = kOptimalityTol);

// Spherical interpolation between directors.  b is flipped into the
// hemisphere of a first, so the path never takes the long way round; t=0
// returns a, t=1 returns the aligned copy of b.
Director slerp_director(const Director& a, const Director& b, double t);

}  // namespace nembrane
