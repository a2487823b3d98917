#include "nembrane/effective_model.hpp"

namespace nembrane {

SymTensor3 shear_matrix(const std::array<double, 2>& u) {
    SymTensor3 A;
    A.a13 = 0.5 * u[0];
    A.a23 = 0.5 * u[1];
    return A;
}

double optimal_k33_film(double e_trace, const MaterialParams& mat) {
    return -mat.lambda / (mat.lambda + 2.0 * mat.mu) * e_trace;
}

double optimal_k33_nematic(double q33, const MaterialParams& mat) {
    return 2.0 * mat.mu / (mat.lambda + 2.0 * mat.mu) * q33;
}

double film_density(const SymTensor2& e, const MaterialParams& mat) {
    const double tr = e.trace();
    return mat.w33() * tr * tr + e.frobenius_sq();
}

double foundation_density(const std::array<double, 2>& u, const MaterialParams& mat,
                          double tol) {
    return dist2_weighted(shear_matrix(u), mat, tol);
}

QTensor optimal_Qbar(const std::array<double, 2>& u, const MaterialParams& mat,
                     double tol) {
    return project_QB_weighted(shear_matrix(u), mat, tol);
}

FoundationEval evaluate_foundation(const std::array<double, 2>& u, const MaterialParams& mat,
                                   double tol, const SymTensor3* warm_start) {
    const SymTensor3 A = shear_matrix(u);
    FoundationEval out;
    out.qbar = project_QB_weighted(A, mat, tol, kProjectionMaxIter, warm_start);
    out.density = weighted_norm_sq(A - out.qbar.t, mat);
    out.grad = {u[0] - 2.0 * out.qbar.t.a13, u[1] - 2.0 * out.qbar.t.a23};
    return out;
}

double e0_density(const SymTensor2& e, const std::array<double, 2>& u,
                  const MaterialParams& mat, double tol) {
    return 0.5 * (film_density(e, mat) + foundation_density(u, mat, tol));
}

}  // namespace nembrane
