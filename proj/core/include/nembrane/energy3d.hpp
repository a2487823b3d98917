#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "nembrane/effective_model.hpp"
#include "nembrane/microstructure.hpp"
#include "nembrane/qtensor.hpp"
#include "nembrane/sym3.hpp"

namespace nembrane {

// One rung of the thin-layer parameter ladder.  eps is the layer thickness
// ratio; eta the oscillation scale, delta_e the curvature coefficient, delta
// the mollification width (transverse, physical units) and rho the boundary
// cutoff width.
struct ScalingParams {
    double eps = 0.1;
    double eta = 0.01;
    double delta_e = 0.001;
    double delta = 0.001;
    double rho = 0.0;

    // eta = eps^2, delta_e = delta = eps^3, rho = sqrt(eps).
    static ScalingParams ladder(double eps);

    // Separation invariants: the oscillation must live strictly below the
    // thickness (eta/eps <= 1/5) and the curvature budget strictly below the
    // oscillation (delta_e/eta <= 1/5); all parameters positive, delta no
    // larger than eta, rho below 1.
    void validate() const;
};

// Displacement field with an analytic gradient, both in physical
// coordinates.  gradient(x)(i,j) = d v_i / d x_j.
struct Field3D {
    std::function<std::array<double, 3>(const std::array<double, 3>&)> value;
    std::function<Mat3(const std::array<double, 3>&)> gradient;
};

// Pointwise sum of two displacement fields.
Field3D superpose(const Field3D& a, const Field3D& b);

// Scaled strains of the two layers.  The film keeps its in-plane block; the
// bonding layer carries it at order eps so that an oscillation of in-plane
// period eta*eps and transverse period eta enters every block at order one.
// Shared blocks: kappa_a3 = (d3 v_a + (1/eps) da v_3)/2 and
// kappa_33 = (1/eps^2) d3 v_3.
SymTensor3 film_strain(const Mat3& grad, double eps);
SymTensor3 bonding_strain(const Mat3& grad, double eps);

// Isotropic elastic density in units of mu: |E|_F^2 + (lambda/2mu)(tr E)^2.
double elastic_density(const SymTensor3& E, const MaterialParams& mat);

// Cut-off vanishing in a rho-collar of the whole grain boundary: product of
// one-dimensional smoothstep ramps of width rho along each side of the
// in-plane rectangle [lo, hi] and along the layer faces x3 = -1 and x3 = 0.
// 1 on the eroded core, |grad| <= 3/rho.  Construction throws RhoTooLarge
// when the ramps of opposite sides would overlap (2 rho >= any extent,
// the layer depth 1 included).
struct CutoffTheta {
    std::array<double, 2> lo{};
    std::array<double, 2> hi{};
    double rho = 0.0;

    // In-plane factor and its gradient.
    double value(const std::array<double, 2>& x) const;
    std::array<double, 2> gradient(const std::array<double, 2>& x) const;

    // Transverse factor over (-1, 0) and its derivative.
    double profile(double x3) const;
    double profile_deriv(double x3) const;

    // Full cut-off theta(x) = value(x') * profile(x3).
    double value3(const std::array<double, 3>& x) const;
    std::array<double, 3> gradient3(const std::array<double, 3>& x) const;
};

CutoffTheta cutoff_theta(const std::array<double, 2>& lo, const std::array<double, 2>& hi,
                         double rho);

// Transverse-strain profile: plateau value on the interior, smoothstep ramp
// to zero over a collar of the given width along the rectangle boundary.
struct HApproximant {
    std::array<double, 2> lo{};
    std::array<double, 2> hi{};
    double width = 0.0;
    double plateau = 0.0;

    double value(const std::array<double, 2>& x) const;
    std::array<double, 2> gradient(const std::array<double, 2>& x) const;
};

// plateau = the optimal transverse bonding strain for the given q33; the
// collar width defaults to sqrt(eps) when the argument is zero.  Throws
// RhoTooLarge when 2*width >= min extent.
HApproximant build_h_approximant(const std::array<double, 2>& lo,
                                 const std::array<double, 2>& hi, double q33,
                                 const MaterialParams& mat, double eps,
                                 double width = 0.0);

// Film-layer trial field on omega x (0,1): v' = ubar, v3 = eps^2 h(x').
Field3D build_recovery_film(const std::array<double, 2>& ubar, const HApproximant& h,
                            double eps);

// Bonding-layer trial field on omega x (-1,0) without the oscillating
// corrector: v = (x3 + 1)(ubar + eps^2 h(x') e3).  Clamped at x3 = -1.
Field3D build_recovery_bonding(const std::array<double, 2>& ubar, const HApproximant& h,
                               double eps);

// Oscillating corrector and mollified order field sharing one laminate
// frame.  All pattern geometry lives in the frame diagonalizing qbar; the
// fast variable is y = (x'/(eta eps), x3/eta).
struct NematicRecovery {
    MaterialParams material;
    ScalingParams scaling;
    QTensor qbar;
    LaminateBasis basis;
    Rotation3 frame;        // world = frame . diag . frame^T
    MollifiedField mol;     // width delta/eta in pattern coordinates
    CutoffTheta theta;

    // Mollified order field at a physical bonding-layer point.
    QTensor order_field(const std::array<double, 3>& x) const;

    // Order field without mollification (piecewise constant).
    QTensor order_field_sharp(const std::array<double, 3>& x) const;

    // Corrector displacement w = theta(x) (eta p', eta eps^2 p3)(y) where
    // p(y) = frame . f(frame^T y) - qbar . y, and its physical gradient.
    // theta kills w in a rho-collar of the grain boundary, so the clamping
    // at x3 = -1 and the trace at x3 = 0 are those of the affine profile.
    std::array<double, 3> corrector(const std::array<double, 3>& x) const;
    Mat3 corrector_gradient(const std::array<double, 3>& x) const;
};

NematicRecovery build_recovery_nematic(const std::array<double, 2>& ubar,
                                       const MaterialParams& mat, const ScalingParams& sc,
                                       const std::array<double, 2>& grain_lo,
                                       const std::array<double, 2>& grain_hi);

// The corrector as a displacement field; references nem, which must outlive
// the result.
Field3D corrector_field(const NematicRecovery& nem);

// Averages over one periodicity cell of the pattern, probed on a uniform
// grid in the diagonal frame with central differences for the gradient.
struct CellProbe {
    double grad_sq_avg = 0.0;    // <|grad_y Q|_F^2>, all three directions
    double blend_fraction = 0.0; // volume fraction where mollification acts
    double vp = 0.0;             // <|sym G - qbar|_F^2> = 2/3 - |qbar|_F^2
    SymTensor3 p_moment;         // <p_i p_j>, p = potential - diag.y, pattern frame
};

// samples_per_unit <= 0 picks a resolution from the blend width.
CellProbe periodic_cell_energy(const NematicRecovery& nem, int samples_per_unit = 0);

// Dimension-reduced accounting of the recovery energy on one grain: exact
// bulk (the foundation integrand times area), the film ramp cost, a 2D
// quadrature of the boundary-layer excess of the bonding integrand (exact in
// x3), and the curvature term from the periodic cell probe.  buckets are
// sup-based a-priori estimates of the four remainder channels — film ramp,
// collar excess plus cutoff cross terms, squared cutoff-gradient strain,
// blend layers plus curvature — paired entrywise with the remainder-scale
// terms (rho de^2/(delta eta), rho, eta^2/rho, delta/eta) so each ratio
// stays bounded along the default ladder; bracket =
// max(bucket/term) * sum(terms), so total - bulk <= bracket holds by
// construction while the bracket keeps the remainder's eps-scaling.
struct GrainAccounting {
    double dist_sq = 0.0;
    double bulk = 0.0;
    double film = 0.0;
    double collar = 0.0;
    double curvature = 0.0;
    double total = 0.0;
    double bracket = 0.0;
    std::array<double, 4> buckets{};
    std::array<double, 4> terms{};
    CellProbe probe;
};

// The grain rectangle is taken from nem's cutoff.  h may carry a custom
// collar width; the quadrature resolves the narrower of the two ramps.
GrainAccounting grain_accounting(const NematicRecovery& nem, const HApproximant& h,
                                 const std::array<double, 2>& ubar);

// Direct midpoint quadrature of the two-layer functional on the grain
// [lo,hi] x (-1,1): film integrand (1/2) W(film strain), bonding integrand
// (1/2) W(bonding strain - Q).  Cell sizes must resolve the oscillation
// (in-plane <= eta eps / 8, transverse <= eta / 8) or ResolutionTooCoarse is
// thrown.  The curvature term delta_e^2 (|d3 Q|^2 + eps^2 |d' Q|^2) is taken
// from the periodic cell probe scaled by the grain volume.
struct EnergyBreakdown {
    double film = 0.0;
    double bonding = 0.0;
    double curvature = 0.0;
    double total = 0.0;
};

EnergyBreakdown energy_I(const Field3D& film_field, const Field3D& bonding_field,
                         const NematicRecovery& nem, int n_inplane, int n_transverse,
                         int threads = 1);

// One rung of the thickness sweep.  All entries are energies except the
// scale columns; bulk equals e0 by construction, so
// gap = film + collar + curvature.
struct GammaSweepRow {
    double eps = 0.0;
    double eta = 0.0;
    double delta = 0.0;
    double rho = 0.0;
    double e0 = 0.0;
    double bulk = 0.0;
    double film = 0.0;
    double collar = 0.0;
    double curvature = 0.0;
    double total = 0.0;
    double gap = 0.0;
    double bracket = 0.0;
};

struct GammaSweepReport {
    std::vector<GammaSweepRow> rows;
    QTensor qbar;
    LaminateBasis basis;
    double dist_sq = 0.0;            // foundation density at ubar
    double c_meas = 0.0;             // shared constant of the bracket column
    double uniaxial_residual = 0.0;  // max spectral deviation of sym G_j
    double mean_residual = 0.0;      // |mean G - diag target|_F
};

// Trial-state energy accounting over the ladder rungs eps_list on the grain
// [lo,hi].  The collar column is a 2D quadrature of the boundary-layer
// excess (exact in x3); the bracket column is c_meas * (rho de^2/(delta eta)
// + rho + eta^2/rho + delta/eta) with c_meas the largest ratio of an
// a-priori bucket estimate to its bracket term, so gap <= bracket compares
// the refined accounting against honest sup-based bounds.
GammaSweepReport gamma_sweep(const std::array<double, 2>& ubar, const MaterialParams& mat,
                             const std::array<double, 2>& grain_lo,
                             const std::array<double, 2>& grain_hi,
                             const std::vector<double>& eps_list);

// |u|_L2 vs |d3 u|_L2 over omega x (-1,0) for fields clamped at the bottom
// face, u = (x3+1) P(x) with P a random vector polynomial of degree two.
// The slab has unit width so the bound is |u| <= |d3 u|; both sides are
// integrated exactly (Gauss-Legendre).
struct PoincareCase {
    double lhs = 0.0;  // |u|_L2
    double rhs = 0.0;  // |d3 u|_L2
};

std::vector<PoincareCase> poincare_check(int count, std::uint64_t seed);

}  // namespace nembrane
