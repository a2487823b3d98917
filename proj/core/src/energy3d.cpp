#include "nembrane/energy3d.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "nembrane/errors.hpp"

namespace nembrane {

namespace {

constexpr double kThird = 1.0 / 3.0;

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * (3.0 - 2.0 * t);
}

double smoothstep_deriv(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return 6.0 * t * (1.0 - t);
}

struct RampEval {
    double value = 0.0;
    std::array<double, 2> grad{};
};

// Product over both in-plane axes of the two one-sided smoothstep ramps of
// the rectangle [lo, hi]; 1 on the core, 0 on the boundary.
RampEval ramp_rect(const std::array<double, 2>& lo, const std::array<double, 2>& hi,
                   double width, const std::array<double, 2>& x) {
    double f[2];
    double df[2];
    for (int d = 0; d < 2; ++d) {
        const double tl = (x[d] - lo[d]) / width;
        const double th = (hi[d] - x[d]) / width;
        const double sl = smoothstep(tl);
        const double sh = smoothstep(th);
        f[d] = sl * sh;
        df[d] = (smoothstep_deriv(tl) * sh - sl * smoothstep_deriv(th)) / width;
    }
    RampEval out;
    out.value = f[0] * f[1];
    out.grad = {df[0] * f[1], f[0] * df[1]};
    return out;
}

void check_rect(const std::array<double, 2>& lo, const std::array<double, 2>& hi,
                double width, const char* what) {
    if (!(width > 0.0) || !std::isfinite(width)) {
        std::ostringstream msg;
        msg << what << ": ramp width must be positive, got " << width;
        throw ValidationError(msg.str());
    }
    const double ext = std::min(hi[0] - lo[0], hi[1] - lo[1]);
    if (!(ext > 0.0)) {
        std::ostringstream msg;
        msg << what << ": rectangle has non-positive extent";
        throw ValidationError(msg.str());
    }
    if (2.0 * width >= ext) {
        std::ostringstream msg;
        msg << what << ": ramp width " << width << " does not fit twice into the smallest "
            << "extent " << ext;
        throw RhoTooLarge(msg.str());
    }
}

struct Kahan {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

double portable_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// 4-point Gauss-Legendre on [-1, 1]: exact through degree 7.
constexpr std::array<double, 4> kGLNodes = {
    -0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGLWeights = {
    0.34785484513745385, 0.6521451548625461, 0.6521451548625461, 0.34785484513745385};

// Monomial basis 1, x, y, z, x^2, y^2, z^2, xy, xz, yz.
double monomial(int k, double x, double y, double z) {
    switch (k) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return y;
        case 3: return z;
        case 4: return x * x;
        case 5: return y * y;
        case 6: return z * z;
        case 7: return x * y;
        case 8: return x * z;
        default: return y * z;
    }
}

double monomial_dz(int k, double x, double y, double z) {
    switch (k) {
        case 3: return 1.0;
        case 6: return 2.0 * z;
        case 8: return x;
        case 9: return y;
        default: return 0.0;
    }
}

}  // namespace

ScalingParams ScalingParams::ladder(double eps) {
    if (!(eps > 0.0) || !(eps < 1.0) || !std::isfinite(eps)) {
        std::ostringstream msg;
        msg << "ScalingParams::ladder: eps must lie in (0,1), got " << eps;
        throw ValidationError(msg.str());
    }
    ScalingParams sc;
    sc.eps = eps;
    sc.eta = eps * eps;
    sc.delta_e = eps * eps * eps;
    sc.delta = sc.delta_e;
    sc.rho = std::sqrt(eps);
    sc.validate();
    return sc;
}

void ScalingParams::validate() const {
    const double vals[] = {eps, eta, delta_e, delta, rho};
    const char* names[] = {"eps", "eta", "delta_e", "delta", "rho"};
    for (int i = 0; i < 5; ++i) {
        if (!(vals[i] > 0.0) || !std::isfinite(vals[i])) {
            std::ostringstream msg;
            msg << "ScalingParams: " << names[i] << " must be positive, got " << vals[i];
            throw ValidationError(msg.str());
        }
    }
    const double slack = 1.0 + 1e-12;
    if (eta > 0.2 * eps * slack) {
        std::ostringstream msg;
        msg << "ScalingParams: oscillation scale too coarse, eta/eps = " << eta / eps
            << " exceeds 1/5";
        throw ValidationError(msg.str());
    }
    if (delta_e > 0.2 * eta * slack) {
        std::ostringstream msg;
        msg << "ScalingParams: curvature budget too large, delta_e/eta = " << delta_e / eta
            << " exceeds 1/5";
        throw ValidationError(msg.str());
    }
    if (delta > eta * slack) {
        std::ostringstream msg;
        msg << "ScalingParams: mollification width delta = " << delta
            << " exceeds the oscillation scale eta = " << eta;
        throw ValidationError(msg.str());
    }
    if (rho >= 1.0) {
        std::ostringstream msg;
        msg << "ScalingParams: cutoff width rho = " << rho << " must stay below 1";
        throw ValidationError(msg.str());
    }
}

Field3D superpose(const Field3D& a, const Field3D& b) {
    Field3D out;
    const auto av = a.value;
    const auto bv = b.value;
    out.value = [av, bv](const std::array<double, 3>& x) {
        const auto va = av(x);
        const auto vb = bv(x);
        return std::array<double, 3>{va[0] + vb[0], va[1] + vb[1], va[2] + vb[2]};
    };
    const auto ag = a.gradient;
    const auto bg = b.gradient;
    out.gradient = [ag, bg](const std::array<double, 3>& x) { return ag(x) + bg(x); };
    return out;
}

SymTensor3 film_strain(const Mat3& g, double eps) {
    SymTensor3 e;
    e.a11 = g(0, 0);
    e.a22 = g(1, 1);
    e.a12 = 0.5 * (g(0, 1) + g(1, 0));
    e.a13 = 0.5 * (g(0, 2) + g(2, 0) / eps);
    e.a23 = 0.5 * (g(1, 2) + g(2, 1) / eps);
    e.a33 = g(2, 2) / (eps * eps);
    return e;
}

SymTensor3 bonding_strain(const Mat3& g, double eps) {
    SymTensor3 e;
    e.a11 = eps * g(0, 0);
    e.a22 = eps * g(1, 1);
    e.a12 = 0.5 * eps * (g(0, 1) + g(1, 0));
    e.a13 = 0.5 * (g(0, 2) + g(2, 0) / eps);
    e.a23 = 0.5 * (g(1, 2) + g(2, 1) / eps);
    e.a33 = g(2, 2) / (eps * eps);
    return e;
}

double elastic_density(const SymTensor3& E, const MaterialParams& mat) {
    const double tr = E.trace();
    return E.frobenius_sq() + 0.5 * (mat.lambda / mat.mu) * tr * tr;
}

double CutoffTheta::value(const std::array<double, 2>& x) const {
    return ramp_rect(lo, hi, rho, x).value;
}

std::array<double, 2> CutoffTheta::gradient(const std::array<double, 2>& x) const {
    return ramp_rect(lo, hi, rho, x).grad;
}

double CutoffTheta::profile(double x3) const {
    return smoothstep((x3 + 1.0) / rho) * smoothstep(-x3 / rho);
}

double CutoffTheta::profile_deriv(double x3) const {
    const double tl = (x3 + 1.0) / rho;
    const double th = -x3 / rho;
    return (smoothstep_deriv(tl) * smoothstep(th) - smoothstep(tl) * smoothstep_deriv(th)) /
           rho;
}

double CutoffTheta::value3(const std::array<double, 3>& x) const {
    return value({x[0], x[1]}) * profile(x[2]);
}

std::array<double, 3> CutoffTheta::gradient3(const std::array<double, 3>& x) const {
    const RampEval r = ramp_rect(lo, hi, rho, {x[0], x[1]});
    const double pr = profile(x[2]);
    return {r.grad[0] * pr, r.grad[1] * pr, r.value * profile_deriv(x[2])};
}

CutoffTheta cutoff_theta(const std::array<double, 2>& lo, const std::array<double, 2>& hi,
                         double rho) {
    check_rect(lo, hi, rho, "cutoff_theta");
    if (2.0 * rho >= 1.0) {
        std::ostringstream msg;
        msg << "cutoff_theta: ramp width " << rho << " does not fit twice into the layer "
            << "depth 1";
        throw RhoTooLarge(msg.str());
    }
    CutoffTheta theta;
    theta.lo = lo;
    theta.hi = hi;
    theta.rho = rho;
    return theta;
}

double HApproximant::value(const std::array<double, 2>& x) const {
    return plateau * ramp_rect(lo, hi, width, x).value;
}

std::array<double, 2> HApproximant::gradient(const std::array<double, 2>& x) const {
    const auto r = ramp_rect(lo, hi, width, x);
    return {plateau * r.grad[0], plateau * r.grad[1]};
}

HApproximant build_h_approximant(const std::array<double, 2>& lo,
                                 const std::array<double, 2>& hi, double q33,
                                 const MaterialParams& mat, double eps, double width) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        std::ostringstream msg;
        msg << "build_h_approximant: eps must be positive, got " << eps;
        throw ValidationError(msg.str());
    }
    if (width <= 0.0) width = std::sqrt(eps);
    check_rect(lo, hi, width, "build_h_approximant");
    HApproximant h;
    h.lo = lo;
    h.hi = hi;
    h.width = width;
    h.plateau = optimal_k33_nematic(q33, mat);
    return h;
}

Field3D build_recovery_film(const std::array<double, 2>& ubar, const HApproximant& h,
                            double eps) {
    Field3D out;
    const double e2 = eps * eps;
    out.value = [ubar, h, e2](const std::array<double, 3>& x) {
        return std::array<double, 3>{ubar[0], ubar[1], e2 * h.value({x[0], x[1]})};
    };
    out.gradient = [h, e2](const std::array<double, 3>& x) {
        const auto g = h.gradient({x[0], x[1]});
        Mat3 m = Mat3::zero();
        m(2, 0) = e2 * g[0];
        m(2, 1) = e2 * g[1];
        return m;
    };
    return out;
}

Field3D build_recovery_bonding(const std::array<double, 2>& ubar, const HApproximant& h,
                               double eps) {
    Field3D out;
    const double e2 = eps * eps;
    out.value = [ubar, h, e2](const std::array<double, 3>& x) {
        const double lift = x[2] + 1.0;
        return std::array<double, 3>{lift * ubar[0], lift * ubar[1],
                                     lift * e2 * h.value({x[0], x[1]})};
    };
    out.gradient = [ubar, h, e2](const std::array<double, 3>& x) {
        const double lift = x[2] + 1.0;
        const double hv = h.value({x[0], x[1]});
        const auto hg = h.gradient({x[0], x[1]});
        Mat3 m = Mat3::zero();
        m(0, 2) = ubar[0];
        m(1, 2) = ubar[1];
        m(2, 0) = lift * e2 * hg[0];
        m(2, 1) = lift * e2 * hg[1];
        m(2, 2) = e2 * hv;
        return m;
    };
    return out;
}

QTensor NematicRecovery::order_field(const std::array<double, 3>& x) const {
    const double ie = 1.0 / (scaling.eta * scaling.eps);
    const std::array<double, 3> y = {x[0] * ie, x[1] * ie, x[2] / scaling.eta};
    const QTensor qd = mol.sample(frame.apply_transposed(y));
    return QTensor::retraced(conjugate_sym(frame, qd.t));
}

QTensor NematicRecovery::order_field_sharp(const std::array<double, 3>& x) const {
    const double ie = 1.0 / (scaling.eta * scaling.eps);
    const std::array<double, 3> y = {x[0] * ie, x[1] * ie, x[2] / scaling.eta};
    const QTensor qd = mol.sampler.sample(frame.apply_transposed(y));
    return QTensor::retraced(conjugate_sym(frame, qd.t));
}

std::array<double, 3> NematicRecovery::corrector(const std::array<double, 3>& x) const {
    const double eps = scaling.eps;
    const double eta = scaling.eta;
    const double ie = 1.0 / (eta * eps);
    const std::array<double, 3> y = {x[0] * ie, x[1] * ie, x[2] / eta};
    const std::array<double, 3> f = frame.apply(mol.sampler.potential(frame.apply_transposed(y)));
    const std::array<double, 3> qy = qbar.t.apply(y);
    const std::array<double, 3> p = {f[0] - qy[0], f[1] - qy[1], f[2] - qy[2]};
    const double th = theta.value3(x);
    return {eta * th * p[0], eta * th * p[1], eta * eps * eps * th * p[2]};
}

Mat3 NematicRecovery::corrector_gradient(const std::array<double, 3>& x) const {
    const double eps = scaling.eps;
    const double eta = scaling.eta;
    const double ie = 1.0 / (eta * eps);
    const std::array<double, 3> y = {x[0] * ie, x[1] * ie, x[2] / eta};
    const std::array<double, 3> z = frame.apply_transposed(y);

    const Mat3 gp = frame.mul(mol.sampler.gradient_at(z)).mul(frame.transpose());
    Mat3 dp = Mat3::zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dp(i, j) = gp(i, j) - qbar(i, j);

    const std::array<double, 3> f = frame.apply(mol.sampler.potential(z));
    const std::array<double, 3> qy = qbar.t.apply(y);
    const std::array<double, 3> p = {f[0] - qy[0], f[1] - qy[1], f[2] - qy[2]};

    const double th = theta.value3(x);
    const auto gth = theta.gradient3(x);

    Mat3 g = Mat3::zero();
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) g(a, b) = th * dp(a, b) / eps + eta * gth[b] * p[a];
        g(a, 2) = th * dp(a, 2) + eta * gth[2] * p[a];
    }
    for (int b = 0; b < 2; ++b) g(2, b) = th * eps * dp(2, b) + eta * eps * eps * gth[b] * p[2];
    g(2, 2) = th * eps * eps * dp(2, 2) + eta * eps * eps * gth[2] * p[2];
    return g;
}

Field3D corrector_field(const NematicRecovery& nem) {
    Field3D out;
    out.value = [&nem](const std::array<double, 3>& x) { return nem.corrector(x); };
    out.gradient = [&nem](const std::array<double, 3>& x) { return nem.corrector_gradient(x); };
    return out;
}

NematicRecovery build_recovery_nematic(const std::array<double, 2>& ubar,
                                       const MaterialParams& mat, const ScalingParams& sc,
                                       const std::array<double, 2>& grain_lo,
                                       const std::array<double, 2>& grain_hi) {
    sc.validate();
    NematicRecovery nem;
    nem.material = mat;
    nem.scaling = sc;
    nem.qbar = optimal_Qbar(ubar, mat, 1e-12);
    const auto [target, R] = diagonalize_target(nem.qbar);
    nem.basis = build_laminate_basis(target);
    nem.frame = R;
    PatternSampler sampler;
    sampler.basis = nem.basis;
    sampler.n = 1;
    nem.mol = mollify_field(sampler, sc.delta / sc.eta);
    nem.theta = cutoff_theta(grain_lo, grain_hi, sc.rho);
    return nem;
}

CellProbe periodic_cell_energy(const NematicRecovery& nem, int samples_per_unit) {
    const double dt = nem.mol.delta;
    if (samples_per_unit <= 0) {
        samples_per_unit = std::max(64, static_cast<int>(std::ceil(8.0 / dt)));
    }
    const double p1 = nem.basis.degenerate ? 2.0 : 2.0 * nem.basis.period;
    const double p3 = nem.basis.degenerate ? 4.0 : 2.0;
    const long n1 = std::lround(std::ceil(p1 * samples_per_unit));
    const long n3 = std::lround(std::ceil(p3 * samples_per_unit));
    if (n1 * n3 > 32000000L) {
        std::ostringstream msg;
        msg << "periodic_cell_energy: probe grid " << n1 << " x " << n3
            << " is too large (period " << p1 << " x " << p3 << ")";
        throw ValidationError(msg.str());
    }
    const double step = dt / 50.0;
    const double y2 = 0.3777;

    const DiagonalTarget& tgt = nem.basis.target;
    Kahan grad_sq;
    Kahan blend;
    Kahan m11, m22, m33, m12, m13, m23;
    long count = 0;
    for (long i = 0; i < n1; ++i) {
        const double y1 = (static_cast<double>(i) + 0.5) * p1 / static_cast<double>(n1);
        for (long k = 0; k < n3; ++k) {
            const double y3 = (static_cast<double>(k) + 0.5) * p3 / static_cast<double>(n3);
            const std::array<double, 3> y = {y1, y2, y3};
            double pt = 0.0;
            for (int d = 0; d < 3; ++d) {
                std::array<double, 3> yp = y;
                std::array<double, 3> ym = y;
                yp[d] += step;
                ym[d] -= step;
                const SymTensor3 diff = nem.mol.sample(yp).t - nem.mol.sample(ym).t;
                const double s = 1.0 / (2.0 * step);
                pt += diff.frobenius_sq() * s * s;
            }
            grad_sq.add(pt);
            const SymTensor3 dev = nem.mol.sample(y).t - nem.mol.sampler.sample(y).t;
            blend.add(dev.frobenius() > 1e-12 ? 1.0 : 0.0);
            const std::array<double, 3> f = nem.mol.sampler.potential(y);
            const std::array<double, 3> p = {f[0] - tgt.a * y[0], f[1] - tgt.b * y[1],
                                             f[2] - tgt.c * y[2]};
            m11.add(p[0] * p[0]);
            m22.add(p[1] * p[1]);
            m33.add(p[2] * p[2]);
            m12.add(p[0] * p[1]);
            m13.add(p[0] * p[2]);
            m23.add(p[1] * p[2]);
            ++count;
        }
    }

    CellProbe probe;
    const double inv = 1.0 / static_cast<double>(count);
    probe.grad_sq_avg = grad_sq.sum * inv;
    probe.blend_fraction = blend.sum * inv;
    probe.vp = 2.0 * kThird - nem.qbar.t.frobenius_sq();
    probe.p_moment.a11 = m11.sum * inv;
    probe.p_moment.a22 = m22.sum * inv;
    probe.p_moment.a33 = m33.sum * inv;
    probe.p_moment.a12 = m12.sum * inv;
    probe.p_moment.a13 = m13.sum * inv;
    probe.p_moment.a23 = m23.sum * inv;
    return probe;
}

EnergyBreakdown energy_I(const Field3D& film_field, const Field3D& bonding_field,
                         const NematicRecovery& nem, int n_inplane, int n_transverse,
                         int threads) {
    const double eps = nem.scaling.eps;
    const double eta = nem.scaling.eta;
    const auto& lo = nem.theta.lo;
    const auto& hi = nem.theta.hi;
    if (n_inplane < 1 || n_transverse < 1) {
        throw ValidationError("energy_I: cell counts must be positive");
    }
    const double hx = (hi[0] - lo[0]) / n_inplane;
    const double hy = (hi[1] - lo[1]) / n_inplane;
    const double hz = 1.0 / n_transverse;
    const double slack = 1.0 + 1e-9;
    if (hx > eta * eps / 8.0 * slack || hy > eta * eps / 8.0 * slack) {
        std::ostringstream msg;
        msg << "energy_I: in-plane cell " << std::max(hx, hy)
            << " does not resolve the oscillation, need <= " << eta * eps / 8.0;
        throw ResolutionTooCoarse(msg.str());
    }
    if (hz > eta / 8.0 * slack) {
        std::ostringstream msg;
        msg << "energy_I: transverse cell " << hz << " does not resolve the oscillation, "
            << "need <= " << eta / 8.0;
        throw ResolutionTooCoarse(msg.str());
    }

    const MaterialParams mat = nem.material;
    std::vector<double> film_rows(static_cast<std::size_t>(n_inplane), 0.0);
    std::vector<double> bond_rows(static_cast<std::size_t>(n_inplane), 0.0);

    auto work = [&](int row_begin, int row_end) {
        for (int i = row_begin; i < row_end; ++i) {
            const double x1 = lo[0] + (i + 0.5) * hx;
            Kahan film_sum;
            Kahan bond_sum;
            for (int j = 0; j < n_inplane; ++j) {
                const double x2 = lo[1] + (j + 0.5) * hy;
                for (int k = 0; k < n_transverse; ++k) {
                    const double zf = (k + 0.5) * hz;
                    const std::array<double, 3> xf = {x1, x2, zf};
                    film_sum.add(elastic_density(film_strain(film_field.gradient(xf), eps), mat));
                    const std::array<double, 3> xb = {x1, x2, zf - 1.0};
                    const SymTensor3 E =
                        bonding_strain(bonding_field.gradient(xb), eps) - nem.order_field(xb).t;
                    bond_sum.add(elastic_density(E, mat));
                }
            }
            film_rows[static_cast<std::size_t>(i)] = film_sum.sum;
            bond_rows[static_cast<std::size_t>(i)] = bond_sum.sum;
        }
    };

    threads = std::clamp(threads, 1, n_inplane);
    if (threads == 1) {
        work(0, n_inplane);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        const int chunk = (n_inplane + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int b = t * chunk;
            const int e = std::min(n_inplane, b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }

    const double cell = hx * hy * hz;
    Kahan film_total;
    Kahan bond_total;
    for (int i = 0; i < n_inplane; ++i) {
        film_total.add(film_rows[static_cast<std::size_t>(i)]);
        bond_total.add(bond_rows[static_cast<std::size_t>(i)]);
    }

    EnergyBreakdown out;
    out.film = 0.5 * film_total.sum * cell;
    out.bonding = 0.5 * bond_total.sum * cell;
    const CellProbe probe = periodic_cell_energy(nem);
    const double area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    const double de = nem.scaling.delta_e;
    out.curvature = 0.5 * (de * de) / (eta * eta) * area * probe.grad_sq_avg;
    out.total = out.film + out.bonding + out.curvature;
    return out;
}

GrainAccounting grain_accounting(const NematicRecovery& nem, const HApproximant& h,
                                 const std::array<double, 2>& ubar) {
    const MaterialParams& mat = nem.material;
    const ScalingParams& sc = nem.scaling;
    const std::array<double, 2>& lo = nem.theta.lo;
    const std::array<double, 2>& hi = nem.theta.hi;

    GrainAccounting acc;
    acc.dist_sq = weighted_norm_sq(shear_matrix(ubar) - nem.qbar.t, mat);

    // Largest order-tensor jump across face-sharing cells.
    double jump = 0.0;
    const auto pair_jump = [&](int i, int j) {
        jump = std::max(jump, (nem.basis.G[static_cast<std::size_t>(i)].sym() -
                               nem.basis.G[static_cast<std::size_t>(j)].sym())
                                  .frobenius());
    };
    if (nem.basis.degenerate) {
        pair_jump(0, 1);
    } else {
        pair_jump(0, 1);
        pair_jump(2, 3);
        pair_jump(0, 2);
        pair_jump(1, 3);
    }

    const double lx = hi[0] - lo[0];
    const double ly = hi[1] - lo[1];
    const double area = lx * ly;
    const double perimeter = 2.0 * (lx + ly);
    const double lam_over_2mu = 0.5 * mat.lambda / mat.mu;
    const double q33 = nem.qbar(2, 2);
    const std::array<double, 2> bshift = {0.5 * ubar[0] - nem.qbar(0, 2),
                                          0.5 * ubar[1] - nem.qbar(1, 2)};
    const double qab_sq = nem.qbar(0, 0) * nem.qbar(0, 0) +
                          nem.qbar(1, 1) * nem.qbar(1, 1) +
                          2.0 * nem.qbar(0, 1) * nem.qbar(0, 1);

    acc.bulk = 0.5 * acc.dist_sq * area;
    acc.probe = periodic_cell_energy(nem);

    // Boundary-layer quadrature, resolving the narrower of the two in-plane
    // ramps.  The transverse direction is integrated in closed form; with t
    // the in-plane cut-off factor and r the transverse smoothstep profile,
    //   int_0^1 (1 - t r)^2 dx3 = (1 - t)^2 + rho (2t - (44/35) t^2),
    // so the oscillation shut-off splits into the in-plane collar part and
    // the face-collar part, the latter bounded by (35/44) rho pointwise.
    const double wmin = std::min(h.width, sc.rho);
    const int nx = std::min(4096, static_cast<int>(std::ceil(lx * 24.0 / wmin)));
    const int ny = std::min(4096, static_cast<int>(std::ceil(ly * 24.0 / wmin)));
    const double hx = lx / nx;
    const double hy = ly / ny;

    // Quadratic form of the cutoff-gradient strain eta theta' (x) p(y),
    // fast-averaged over the pattern cell via the second moments of p.  The
    // in-plane and transverse theta-derivative products integrate against
    // int r r' dx3 = 0, so the two channels separate exactly in x3.
    const SymTensor3 pm = conjugate_sym(nem.frame, acc.probe.p_moment);
    const double r2_int = 1.0 - (44.0 / 35.0) * sc.rho;  // int r^2 dx3
    const double rd_int = 2.4 / sc.rho;                  // int (r')^2 dx3
    const double ee = sc.eps * sc.eta;
    const double tr_form = sc.eta * sc.eta *
                           (0.5 * (pm.a11 + pm.a22) + (1.0 + lam_over_2mu) * pm.a33);

    Kahan collar_sum;
    Kahan grad_h_sq;
    Kahan e_theta_sum;
    double sup_excess = 0.0;
    double support = 0.0;
    double sup_w = 0.0;
    for (int i = 0; i < nx; ++i) {
        const double x1 = lo[0] + (i + 0.5) * hx;
        for (int j = 0; j < ny; ++j) {
            const double x2 = lo[1] + (j + 0.5) * hy;
            const std::array<double, 2> xp = {x1, x2};
            const double hv = h.value(xp);
            const auto hg = h.gradient(xp);
            const double th = nem.theta.value(xp);
            double w_point = qab_sq + (hv - q33) * (hv - q33) + lam_over_2mu * hv * hv;
            double w_worst = w_point;
            for (int a = 0; a < 2; ++a) {
                const double c = 0.5 * sc.eps * hg[a];
                w_point += 2.0 * (bshift[a] * bshift[a] + bshift[a] * c + c * c / 3.0);
                const double worst = std::abs(bshift[a]) + std::abs(c);
                w_worst += 2.0 * worst * worst;
            }
            const double omt = 1.0 - th;
            const double face = sc.rho * th * (2.0 - (44.0 / 35.0) * th);
            const double excess =
                0.5 * (w_point + omt * omt * acc.probe.vp) - 0.5 * acc.dist_sq;
            collar_sum.add(excess + 0.5 * face * acc.probe.vp);
            grad_h_sq.add(hg[0] * hg[0] + hg[1] * hg[1]);
            if (excess > 1e-12 * std::max(1.0, acc.dist_sq)) {
                sup_excess = std::max(sup_excess, excess);
                support += 1.0;
            }
            sup_w = std::max(sup_w, w_worst);

            const auto gt = nem.theta.gradient(xp);
            const double gsq = gt[0] * gt[0] + gt[1] * gt[1];
            const double cross12 = 2.0 * gt[0] * gt[1] * pm.a12;
            const double fro_diag =
                gt[0] * gt[0] * pm.a11 + gt[1] * gt[1] * pm.a22;
            const double off =
                0.5 * (gt[0] * gt[0] * pm.a22 + cross12 + gt[1] * gt[1] * pm.a11);
            const double ip_form =
                ee * ee * (fro_diag + off + lam_over_2mu * (fro_diag + cross12) +
                           0.5 * gsq * pm.a33);
            e_theta_sum.add(r2_int * ip_form + rd_int * th * th * tr_form);
        }
    }
    const double cell = hx * hy;
    const double e_theta = 0.5 * e_theta_sum.sum * cell;
    acc.collar = collar_sum.sum * cell + e_theta;
    acc.film = 0.25 * sc.eps * sc.eps * grad_h_sq.sum * cell;
    acc.curvature = 0.5 * (sc.delta_e * sc.delta_e) / (sc.eta * sc.eta) * area *
                    acc.probe.grad_sq_avg;
    acc.total = acc.bulk + acc.film + acc.collar + acc.curvature;

    // Largest pointwise pattern deviation from its mean (traceless, so its
    // elastic seminorm is the Frobenius norm itself).
    Mat3 gmean = Mat3::zero();
    for (const Mat3& G : nem.basis.G) gmean = gmean + G;
    gmean = gmean * 0.25;
    double qdev = 0.0;
    for (const Mat3& G : nem.basis.G) {
        qdev = std::max(qdev, (G.sym() - gmean.sym()).frobenius());
    }

    // A-priori estimates against the remainder-scale terms.  The pairing
    // keeps every bucket/term ratio bounded along the default ladder, so
    // the measured constant is stable across rungs: the h-ramp film cost
    // scales like rho delta_e^2/(delta eta), the collar excess and the
    // Cauchy-Schwarz bound on the cutoff cross term like rho, the squared
    // cutoff-gradient strain like eta^2/rho, and the mollification and
    // curvature costs like delta/eta.
    const double b_norm = std::sqrt(sup_w) + qdev;
    const double collar_meas = sc.rho * (perimeter + 2.0 * area);
    acc.buckets[0] = acc.film;
    acc.buckets[1] = sup_excess * support * cell +
                     0.5 * (35.0 / 44.0) * sc.rho * area * acc.probe.vp +
                     b_norm * std::sqrt(2.0 * collar_meas * e_theta);
    acc.buckets[2] = e_theta;
    acc.buckets[3] = 0.5 * area * (2.0 * b_norm + jump) * jump * acc.probe.blend_fraction +
                     acc.curvature;

    acc.terms[0] = sc.rho * sc.delta_e * sc.delta_e / (sc.delta * sc.eta);
    acc.terms[1] = sc.rho;
    acc.terms[2] = sc.eta * sc.eta / sc.rho;
    acc.terms[3] = sc.delta / sc.eta;

    double c_grain = 0.0;
    double term_sum = 0.0;
    for (int k = 0; k < 4; ++k) {
        c_grain = std::max(c_grain, acc.buckets[static_cast<std::size_t>(k)] /
                                        acc.terms[static_cast<std::size_t>(k)]);
        term_sum += acc.terms[static_cast<std::size_t>(k)];
    }
    acc.bracket = c_grain * term_sum;
    return acc;
}

GammaSweepReport gamma_sweep(const std::array<double, 2>& ubar, const MaterialParams& mat,
                             const std::array<double, 2>& grain_lo,
                             const std::array<double, 2>& grain_hi,
                             const std::vector<double>& eps_list) {
    if (eps_list.empty()) {
        throw ValidationError("gamma_sweep: need at least one thickness");
    }
    GammaSweepReport report;
    report.qbar = optimal_Qbar(ubar, mat, 1e-12);
    const SymTensor3 A = shear_matrix(ubar);
    report.dist_sq = weighted_norm_sq(A - report.qbar.t, mat);
    const auto [target, R] = diagonalize_target(report.qbar);
    report.basis = build_laminate_basis(target);

    double uni = 0.0;
    for (const Mat3& G : report.basis.G) {
        const EigenDecomp ed = eig_sym3(G.sym());
        uni = std::max(uni, std::abs(ed.eigenvalues[0] + kThird));
        uni = std::max(uni, std::abs(ed.eigenvalues[1] + kThird));
        uni = std::max(uni, std::abs(ed.eigenvalues[2] - 2.0 * kThird));
    }
    report.uniaxial_residual = uni;
    Mat3 mean = Mat3::zero();
    for (const Mat3& G : report.basis.G) mean = mean + G;
    mean = mean * 0.25;
    Mat3 diag = Mat3::zero();
    diag(0, 0) = target.a;
    diag(1, 1) = target.b;
    diag(2, 2) = target.c;
    report.mean_residual = (mean - diag).frobenius();

    const double area = (grain_hi[0] - grain_lo[0]) * (grain_hi[1] - grain_lo[1]);
    const double e0 = 0.5 * report.dist_sq * area;

    std::vector<GrainAccounting> accs;
    accs.reserve(eps_list.size());
    report.c_meas = 0.0;
    for (const double eps : eps_list) {
        const ScalingParams sc = ScalingParams::ladder(eps);
        const NematicRecovery nem = build_recovery_nematic(ubar, mat, sc, grain_lo, grain_hi);
        const HApproximant h =
            build_h_approximant(grain_lo, grain_hi, report.qbar(2, 2), mat, eps);
        accs.push_back(grain_accounting(nem, h, ubar));
        const GrainAccounting& acc = accs.back();
        for (int k = 0; k < 4; ++k) {
            report.c_meas = std::max(report.c_meas, acc.buckets[static_cast<std::size_t>(k)] /
                                                        acc.terms[static_cast<std::size_t>(k)]);
        }
    }

    for (std::size_t r = 0; r < eps_list.size(); ++r) {
        const GrainAccounting& acc = accs[r];
        const ScalingParams sc = ScalingParams::ladder(eps_list[r]);
        GammaSweepRow row;
        row.eps = eps_list[r];
        row.eta = sc.eta;
        row.delta = sc.delta;
        row.rho = sc.rho;
        row.e0 = e0;
        row.bulk = acc.bulk;
        row.film = acc.film;
        row.collar = acc.collar;
        row.curvature = acc.curvature;
        row.total = acc.total;
        row.gap = row.total - e0;
        double term_sum = 0.0;
        for (int k = 0; k < 4; ++k) term_sum += acc.terms[static_cast<std::size_t>(k)];
        row.bracket = report.c_meas * term_sum;
        report.rows.push_back(row);
    }
    return report;
}

std::vector<PoincareCase> poincare_check(int count, std::uint64_t seed) {
    if (count < 1) {
        throw ValidationError("poincare_check: need at least one field");
    }
    std::mt19937_64 rng(seed);
    std::vector<PoincareCase> cases;
    cases.reserve(static_cast<std::size_t>(count));

    for (int c = 0; c < count; ++c) {
        std::array<std::array<double, 10>, 3> coeff{};
        for (auto& comp : coeff)
            for (double& v : comp) v = 2.0 * portable_uniform(rng) - 1.0;

        Kahan lhs_sq;
        Kahan rhs_sq;
        for (int ix = 0; ix < 4; ++ix) {
            const double x = 0.5 + 0.5 * kGLNodes[ix];
            const double wx = 0.5 * kGLWeights[ix];
            for (int iy = 0; iy < 4; ++iy) {
                const double y = 0.5 + 0.5 * kGLNodes[iy];
                const double wy = 0.5 * kGLWeights[iy];
                for (int iz = 0; iz < 4; ++iz) {
                    const double z = -0.5 + 0.5 * kGLNodes[iz];
                    const double wz = 0.5 * kGLWeights[iz];
                    const double w = wx * wy * wz;
                    const double lift = z + 1.0;
                    double usq = 0.0;
                    double dsq = 0.0;
                    for (int i = 0; i < 3; ++i) {
                        double p = 0.0;
                        double pz = 0.0;
                        for (int k = 0; k < 10; ++k) {
                            p += coeff[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                                 monomial(k, x, y, z);
                            pz += coeff[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                                  monomial_dz(k, x, y, z);
                        }
                        const double u = lift * p;
                        const double du = p + lift * pz;
                        usq += u * u;
                        dsq += du * du;
                    }
                    lhs_sq.add(w * usq);
                    rhs_sq.add(w * dsq);
                }
            }
        }
        PoincareCase pc;
        pc.lhs = std::sqrt(lhs_sq.sum);
        pc.rhs = std::sqrt(rhs_sq.sum);
        cases.push_back(pc);
    }
    return cases;
}

}  // namespace nembrane
