#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "nembrane/effective_model.hpp"
#include "nembrane/energy3d.hpp"
#include "nembrane/errors.hpp"
#include "nembrane/microstructure.hpp"
#include "nembrane/qtensor.hpp"
#include "test_support.hpp"

using namespace nembrane;
using namespace nembrane::testing;

namespace {

Field3D zero_field() {
    Field3D f;
    f.value = [](const std::array<double, 3>&) { return std::array<double, 3>{}; };
    f.gradient = [](const std::array<double, 3>&) { return Mat3::zero(); };
    return f;
}

double entry_gap(const SymTensor3& a, const SymTensor3& b) {
    return (a - b).frobenius();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double d = static_cast<double>(n);
    return (d * sxy - sx * sy) / (d * sxx - sx * sx);
}

}  // namespace

TEST_CASE("ladder parameters and separation invariants") {
    const ScalingParams sc = ScalingParams::ladder(0.2);
    CHECK(sc.eps == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(sc.eta == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(sc.delta_e == doctest::Approx(0.008).epsilon(1e-15));
    CHECK(sc.delta == doctest::Approx(0.008).epsilon(1e-15));
    CHECK(sc.rho == doctest::Approx(std::sqrt(0.2)).epsilon(1e-15));
    CHECK_NOTHROW(ScalingParams::ladder(0.05).validate());

    CHECK_THROWS_AS(ScalingParams::ladder(0.0), ValidationError);
    CHECK_THROWS_AS(ScalingParams::ladder(1.0), ValidationError);
    CHECK_THROWS_AS(ScalingParams::ladder(-0.1), ValidationError);

    ScalingParams bad = sc;
    bad.eta = 0.05;  // eta/eps = 0.25 > 1/5
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = sc;
    bad.delta_e = 0.01;  // delta_e/eta = 0.25 > 1/5
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = sc;
    bad.delta = 0.05;  // above eta
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = sc;
    bad.rho = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = sc;
    bad.delta = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("layer strains carry the frozen scalings") {
    const double eps = 0.2;

    CHECK(entry_gap(film_strain(Mat3::zero(), eps), SymTensor3::zero()) == 0.0);
    CHECK(entry_gap(bonding_strain(Mat3::zero(), eps), SymTensor3::zero()) == 0.0);

    Mat3 g = Mat3::zero();
    g(0, 1) = 0.6;  // d v_1 / d x_2
    SymTensor3 kf = film_strain(g, eps);
    CHECK(kf.a12 == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(kf.a11 == 0.0);
    SymTensor3 kb = bonding_strain(g, eps);
    CHECK(kb.a12 == doctest::Approx(eps * 0.3).epsilon(1e-15));

    g = Mat3::zero();
    g(2, 2) = eps * eps;  // d v_3 / d x_3
    CHECK(film_strain(g, eps).a33 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bonding_strain(g, eps).a33 == doctest::Approx(1.0).epsilon(1e-15));

    g = Mat3::zero();
    g(0, 2) = 1.0;  // d v_1 / d x_3
    CHECK(film_strain(g, eps).a13 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(bonding_strain(g, eps).a13 == doctest::Approx(0.5).epsilon(1e-15));

    g = Mat3::zero();
    g(2, 0) = 1.0;  // d v_3 / d x_1, carried at 1/eps
    CHECK(film_strain(g, eps).a13 == doctest::Approx(0.5 / eps).epsilon(1e-15));
    CHECK(bonding_strain(g, eps).a13 == doctest::Approx(0.5 / eps).epsilon(1e-15));
}

TEST_CASE("elastic density frozen values") {
    const MaterialParams mat(1.0, 1.0);
    CHECK(elastic_density(SymTensor3::diagonal(1.0, 0.0, 0.0), mat) ==
          doctest::Approx(1.5).epsilon(1e-15));
    SymTensor3 sh{};
    sh.a12 = 0.8;
    CHECK(elastic_density(sh, mat) == doctest::Approx(2.0 * 0.64).epsilon(1e-15));
    CHECK(elastic_density(SymTensor3::zero(), mat) == 0.0);
}

TEST_CASE("cutoff vanishes on the whole grain boundary and obeys the gradient cap") {
    const std::array<double, 2> lo = {0.0, 0.0};
    const std::array<double, 2> hi = {2.0, 2.0};
    const double rho = 0.3;
    const CutoffTheta th = cutoff_theta(lo, hi, rho);

    SUBCASE("frozen point values") {
        CHECK(th.value3({1.0, 1.0, -0.5}) == 1.0);
        CHECK(th.value({1.0, 1.0}) == 1.0);
        CHECK(th.profile(-0.5) == 1.0);
        // Half-way up the bottom transverse ramp: 3 t^2 - 2 t^3 at t = 1/2.
        CHECK(th.profile(-1.0 + 0.15) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(th.profile(0.0) == 0.0);
        CHECK(th.profile(-1.0) == 0.0);
        CHECK(th.value({0.0, 1.0}) == 0.0);
        CHECK(th.value({1.0, 2.0}) == 0.0);
        CHECK(th.value3({1.0, 1.0, 0.0}) == 0.0);
        CHECK(th.value3({1.0, 1.0, -1.0}) == 0.0);
        CHECK(th.value3({0.15, 1.0, -0.5}) ==
              doctest::Approx(th.value({0.15, 1.0})).epsilon(1e-15));
    }

    SUBCASE("gradient matches central differences away from ramp seams") {
        std::mt19937_64 rng(2024);
        int accepted = 0;
        for (int trial = 0; trial < 200 && accepted < 40; ++trial) {
            const std::array<double, 3> x = {uniform(rng, 0.01, 1.99),
                                             uniform(rng, 0.01, 1.99),
                                             uniform(rng, -0.99, -0.01)};
            const auto g = th.gradient3(x);
            const double h1 = 1e-6;
            bool ok = true;
            std::array<double, 3> fd{};
            for (int d = 0; d < 3 && ok; ++d) {
                auto xp = x, xm = x;
                xp[d] += h1;
                xm[d] -= h1;
                const double f1 = (th.value3(xp) - th.value3(xm)) / (2.0 * h1);
                xp[d] -= 0.5 * h1;
                xm[d] += 0.5 * h1;
                const double f2 = (th.value3(xp) - th.value3(xm)) / h1;
                if (std::abs(f1 - f2) > 1e-4 * (1.0 + std::abs(f1))) ok = false;
                fd[d] = f1;
            }
            if (!ok) continue;
            ++accepted;
            for (int d = 0; d < 3; ++d) {
                CHECK(std::abs(g[d] - fd[d]) <= 1e-5 * (1.0 + std::abs(g[d])));
            }
        }
        CHECK(accepted >= 20);
    }

    SUBCASE("gradient magnitude stays below 3/rho") {
        double worst = 0.0;
        for (int i = 0; i <= 80; ++i) {
            for (int j = 0; j <= 80; ++j) {
                for (int k = 1; k < 40; ++k) {
                    const std::array<double, 3> x = {2.0 * i / 80.0, 2.0 * j / 80.0,
                                                     -k / 40.0};
                    const auto g = th.gradient3(x);
                    worst = std::max(worst,
                                     std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]));
                }
            }
        }
        CHECK(worst * rho <= 3.0);
        CHECK(worst * rho >= 1.4);
    }

    SUBCASE("construction guards") {
        CHECK_THROWS_AS(cutoff_theta({0.0, 0.0}, {1.0, 4.0}, 0.5), RhoTooLarge);
        CHECK_THROWS_AS(cutoff_theta({0.0, 0.0}, {4.0, 4.0}, 0.5), RhoTooLarge);
        CHECK_THROWS_AS(cutoff_theta({0.0, 0.0}, {4.0, 4.0}, 0.0), ValidationError);
        CHECK_NOTHROW(cutoff_theta({0.0, 0.0}, {4.0, 4.0}, 0.49));
    }
}

TEST_CASE("transverse-strain profile: plateau value, collar decay, gradient budget") {
    const MaterialParams mat(1.0, 1.0);
    const std::array<double, 2> lo = {0.0, 0.0};
    const std::array<double, 2> hi = {2.0, 2.0};

    const HApproximant h = build_h_approximant(lo, hi, 1.0, mat, 0.2);
    CHECK(h.width == doctest::Approx(std::sqrt(0.2)).epsilon(1e-15));
    CHECK(h.plateau == doctest::Approx(optimal_k33_nematic(1.0, mat)).epsilon(1e-15));
    CHECK(h.value({1.0, 1.0}) == h.plateau);
    CHECK(h.value({0.0, 1.0}) == 0.0);
    CHECK(h.value({1.0, 2.0}) == 0.0);
    CHECK(h.gradient({1.0, 1.0})[0] == 0.0);
    CHECK(h.gradient({1.0, 1.0})[1] == 0.0);

    const HApproximant hw = build_h_approximant(lo, hi, 1.0, mat, 0.2, 0.05);
    CHECK(hw.width == doctest::Approx(0.05).epsilon(1e-15));

    CHECK_THROWS_AS(build_h_approximant(lo, {0.8, 2.0}, 1.0, mat, 0.2, 0.4), RhoTooLarge);
    CHECK_THROWS_AS(build_h_approximant(lo, hi, 1.0, mat, -0.2), ValidationError);

    SUBCASE("scaled collar gradient shrinks like a sublinear power") {
        std::vector<double> epses = {0.2, 0.1, 0.05, 0.025};
        std::vector<double> scaled;
        for (const double eps : epses) {
            const HApproximant he = build_h_approximant(lo, hi, 1.0, mat, eps);
            double acc = 0.0;
            const int n = 400;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const std::array<double, 2> x = {(i + 0.5) * 2.0 / n,
                                                     (j + 0.5) * 2.0 / n};
                    const auto g = he.gradient(x);
                    acc += (g[0] * g[0] + g[1] * g[1]) * (2.0 / n) * (2.0 / n);
                }
            }
            scaled.push_back(eps * std::sqrt(acc));
        }
        const double slope = loglog_slope(epses, scaled);
        CHECK(slope >= 0.6);
        CHECK(slope <= 0.9);
        CHECK(scaled.front() > scaled.back());
    }
}

TEST_CASE("recovery profiles: closed-form strains, clamping, trace continuity") {
    const MaterialParams mat(1.0, 1.0);
    const double eps = 0.2;
    const std::array<double, 2> lo = {0.0, 0.0};
    const std::array<double, 2> hi = {2.0, 2.0};
    const std::array<double, 2> ubar = {1.0, 0.0};
    const double q33 = optimal_Qbar(ubar, mat)(2, 2);
    const HApproximant h = build_h_approximant(lo, hi, q33, mat, eps);

    const Field3D film = build_recovery_film(ubar, h, eps);
    const Field3D bonding = build_recovery_bonding(ubar, h, eps);

    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const std::array<double, 2> xp = {uniform(rng, 0.0, 2.0), uniform(rng, 0.0, 2.0)};
        const double hv = h.value(xp);
        const auto hg = h.gradient(xp);

        const std::array<double, 3> xf = {xp[0], xp[1], uniform(rng, 0.0, 1.0)};
        SymTensor3 kf = film_strain(film.gradient(xf), eps);
        SymTensor3 kf_exp{};
        kf_exp.a13 = 0.5 * eps * hg[0];
        kf_exp.a23 = 0.5 * eps * hg[1];
        CHECK(entry_gap(kf, kf_exp) <= 1e-12);

        const double x3 = uniform(rng, -1.0, 0.0);
        const std::array<double, 3> xb = {xp[0], xp[1], x3};
        SymTensor3 kb = bonding_strain(bonding.gradient(xb), eps);
        SymTensor3 kb_exp{};
        kb_exp.a13 = 0.5 * ubar[0] + 0.5 * eps * (x3 + 1.0) * hg[0];
        kb_exp.a23 = 0.5 * ubar[1] + 0.5 * eps * (x3 + 1.0) * hg[1];
        kb_exp.a33 = hv;
        CHECK(entry_gap(kb, kb_exp) <= 1e-12);

        const auto bottom = bonding.value({xp[0], xp[1], -1.0});
        CHECK(std::abs(bottom[0]) == 0.0);
        CHECK(std::abs(bottom[1]) == 0.0);
        CHECK(std::abs(bottom[2]) == 0.0);

        const auto trace_b = bonding.value({xp[0], xp[1], 0.0});
        const auto trace_f = film.value({xp[0], xp[1], 0.0});
        for (int d = 0; d < 3; ++d) {
            CHECK(std::abs(trace_b[d] - trace_f[d]) <= 1e-15);
        }
        CHECK(trace_b[0] == doctest::Approx(ubar[0]).epsilon(1e-15));
        CHECK(trace_b[2] == doctest::Approx(eps * eps * hv).epsilon(1e-15));
    }
}

TEST_CASE("oscillating recovery: corrector geometry and derivatives") {
    const MaterialParams mat(1.0, 1.0);
    const ScalingParams sc = ScalingParams::ladder(0.2);
    const std::array<double, 2> lo = {0.0, 0.0};
    const std::array<double, 2> hi = {2.0, 2.0};
    const std::array<double, 2> ubar = {1.0, 0.0};
    const NematicRecovery nem = build_recovery_nematic(ubar, mat, sc, lo, hi);

    SUBCASE("corrector vanishes on both faces and the lateral collar") {
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 20; ++trial) {
            const double x1 = uniform(rng, 0.0, 2.0);
            const double x2 = uniform(rng, 0.0, 2.0);
            for (const double x3 : {0.0, -1.0}) {
                const auto w = nem.corrector({x1, x2, x3});
                CHECK(std::abs(w[0]) == 0.0);
                CHECK(std::abs(w[1]) == 0.0);
                CHECK(std::abs(w[2]) == 0.0);
            }
            const auto wl = nem.corrector({0.0, x2, uniform(rng, -1.0, 0.0)});
            CHECK(std::abs(wl[0]) + std::abs(wl[1]) + std::abs(wl[2]) == 0.0);
        }
    }

    SUBCASE("full bonding trial keeps the clamping and the interface trace") {
        const double q33 = nem.qbar(2, 2);
        const HApproximant h = build_h_approximant(lo, hi, q33, mat, sc.eps);
        const Field3D trial = superpose(build_recovery_bonding(ubar, h, sc.eps),
                                        corrector_field(nem));
        std::mt19937_64 rng(78);
        for (int trial_i = 0; trial_i < 20; ++trial_i) {
            const std::array<double, 2> xp = {uniform(rng, 0.0, 2.0),
                                              uniform(rng, 0.0, 2.0)};
            const auto vb = trial.value({xp[0], xp[1], -1.0});
            CHECK(std::abs(vb[0]) + std::abs(vb[1]) + std::abs(vb[2]) <= 1e-12);
            const auto vt = trial.value({xp[0], xp[1], 0.0});
            CHECK(vt[0] == doctest::Approx(ubar[0]).epsilon(1e-14));
            CHECK(std::abs(vt[1]) <= 1e-14);
            CHECK(vt[2] ==
                  doctest::Approx(sc.eps * sc.eps * h.value(xp)).epsilon(1e-14));
        }
    }

    SUBCASE("corrector gradient matches central differences off the pattern faces") {
        std::mt19937_64 rng(79);
        int accepted = 0;
        for (int trial = 0; trial < 300 && accepted < 20; ++trial) {
            const std::array<double, 3> x = {uniform(rng, 0.05, 1.95),
                                             uniform(rng, 0.05, 1.95),
                                             uniform(rng, -0.95, -0.05)};
            const Mat3 g = nem.corrector_gradient(x);
            Mat3 fd = Mat3::zero();
            bool ok = true;
            for (int d = 0; d < 3 && ok; ++d) {
                const double h1 = 1e-6;
                auto xp = x, xm = x;
                xp[d] += h1;
                xm[d] -= h1;
                const auto vp = nem.corrector(xp);
                const auto vm = nem.corrector(xm);
                xp[d] -= 0.5 * h1;
                xm[d] += 0.5 * h1;
                const auto vp2 = nem.corrector(xp);
                const auto vm2 = nem.corrector(xm);
                for (int i = 0; i < 3; ++i) {
                    const double f1 = (vp[i] - vm[i]) / (2.0 * h1);
                    const double f2 = (vp2[i] - vm2[i]) / h1;
                    if (std::abs(f1 - f2) > 1e-4 * (1.0 + std::abs(f1))) {
                        ok = false;
                        break;
                    }
                    fd(i, d) = f1;
                }
            }
            if (!ok) continue;
            ++accepted;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    CHECK(std::abs(g(i, j) - fd(i, j)) <= 1e-5 * (1.0 + std::abs(g(i, j))));
                }
            }
        }
        CHECK(accepted >= 10);
    }

    SUBCASE("construction guards") {
        CHECK_THROWS_AS(build_recovery_nematic(ubar, mat, sc, {0.0, 0.0}, {0.5, 0.5}),
                        RhoTooLarge);
        CHECK_THROWS_AS(build_recovery_nematic({0.0, 0.0}, mat, sc, lo, hi),
                        DeltaTooLarge);
        CHECK_NOTHROW(
            build_recovery_nematic({0.0, 0.0}, mat, ScalingParams::ladder(0.1), lo, hi));
    }
}

TEST_CASE("trial strain collapses to the optimal bonding state on the core") {
    const MaterialParams mat(1.0, 1.0);
    const std::array<double, 2> lo = {0.0, 0.0};
    const std::array<double, 2> hi = {2.0, 2.0};
    const std::array<double, 2> ubar = {1.0, 0.0};
    const SymTensor3 A = shear_matrix(ubar);

    for (const double eps : {0.2, 0.1}) {
        const ScalingParams sc = ScalingParams::ladder(eps);
        const NematicRecovery nem = build_recovery_nematic(ubar, mat, sc, lo, hi);
        const double q33 = nem.qbar(2, 2);
        const HApproximant h = build_h_approximant(lo, hi, q33, mat, eps);
        const Field3D trial = superpose(build_recovery_bonding(ubar, h, eps),
                                        corrector_field(nem));

        SymTensor3 expected = A - nem.qbar.t;
        expected.a33 += h.plateau;

        std::mt19937_64 rng(101 + static_cast<std::uint64_t>(eps * 1000));
        int accepted = 0;
        for (int trial_i = 0; trial_i < 4000 && accepted < 25; ++trial_i) {
            const std::array<double, 3> x = {uniform(rng, 0.0, 2.0),
                                             uniform(rng, 0.0, 2.0),
                                             uniform(rng, -1.0, 0.0)};
            if (nem.theta.value3(x) != 1.0) continue;
            const auto hg = h.gradient({x[0], x[1]});
            if (hg[0] != 0.0 || hg[1] != 0.0) continue;
            const QTensor qs = nem.order_field_sharp(x);
            if ((nem.order_field(x).t - qs.t).frobenius() > 1e-13) continue;
            ++accepted;
            const SymTensor3 E = bonding_strain(trial.gradient(x), eps) - qs.t;
            CHECK(entry_gap(E, expected) <= 1e-10);
        }
        CHECK(accepted >= 25);
    }
}

TEST_CASE("two-layer quadrature on a jump-free pattern reproduces the closed form") {
    // A target already at the uniaxial spectrum makes every laminate cell
    // identical: no jumps, zero potential offsets, constant order field.
    // With the trial fields switched off, the bonding layer pays exactly
    // (1/2)|Q|_F^2 = 1/3 per unit volume and nothing else survives.
    const MaterialParams mat(1.0, 1.0);
    NematicRecovery nem;
    nem.material = mat;
    nem.scaling = ScalingParams::ladder(0.2);
    nem.qbar = QTensor(SymTensor3::diagonal(-1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0));
    DiagonalTarget target;
    target.a = -1.0 / 3.0;
    target.b = -1.0 / 3.0;
    target.c = 2.0 / 3.0;
    nem.basis = build_laminate_basis(target);
    nem.frame = Mat3::identity();
    PatternSampler sampler;
    sampler.basis = nem.basis;
    sampler.n = 1;
    nem.mol = mollify_field(sampler, nem.scaling.delta / nem.scaling.eta);
    nem.theta = cutoff_theta({0.0, 0.0}, {0.1, 0.1}, 0.03);

    CHECK(nem.basis.degenerate);
    for (const auto& G : nem.basis.G) {
        CHECK(entry_gap(G.sym(), nem.qbar.t) <= 1e-14);
    }

    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        const std::array<double, 3> x = {uniform(rng, 0.0, 0.1), uniform(rng, 0.0, 0.1),
                                         uniform(rng, -1.0, 0.0)};
        CHECK(entry_gap(nem.order_field(x).t, nem.qbar.t) <= 1e-13);
        const auto w = nem.corrector(x);
        CHECK(std::abs(w[0]) + std::abs(w[1]) + std::abs(w[2]) <= 1e-15);
    }

    const EnergyBreakdown direct =
        energy_I(zero_field(), zero_field(), nem, 100, 200, 8);
    const double area = 0.1 * 0.1;
    CHECK(direct.film == 0.0);
    CHECK(direct.bonding == doctest::Approx(0.5 * (2.0 / 3.0) * area).epsilon(1e-9));
    CHECK(direct.curvature <= 1e-12);
    CHECK(direct.total == doctest::Approx(0.5 * (2.0 / 3.0) * area).epsilon(1e-9));

    CHECK_THROWS_AS(energy_I(zero_field(), zero_field(), nem, 10, 200, 8),
                    ResolutionTooCoarse);
    CHECK_THROWS_AS(energy_I(zero_field(), zero_field(), nem, 100, 20, 8),
                    ResolutionTooCoarse);
    CHECK_THROWS_AS(energy_I(zero_field(), zero_field(), nem, 0, 200, 8),
                    ValidationError);
}

TEST_CASE("direct quadrature of the full trial stays within the accounting bracket") {
    const MaterialParams mat(1.0, 1.0);
    ScalingParams sc;
    sc.eps = 0.2;
    sc.eta = 0.04;
    sc.delta_e = 0.008;
    sc.delta = 0.008;
    sc.rho = 0.04;
    sc.validate();
    const std::array<double, 2> lo = {0.0, 0.0};
    const std::array<double, 2> hi = {0.2, 0.2};
    const std::array<double, 2> ubar = {1.0, 0.0};

    const NematicRecovery nem = build_recovery_nematic(ubar, mat, sc, lo, hi);
    const HApproximant h = build_h_approximant(lo, hi, nem.qbar(2, 2), mat, sc.eps, 0.05);
    const Field3D film = build_recovery_film(ubar, h, sc.eps);
    const Field3D bonding = superpose(build_recovery_bonding(ubar, h, sc.eps),
                                      corrector_field(nem));

    const GrainAccounting acc = grain_accounting(nem, h, ubar);
    const EnergyBreakdown direct = energy_I(film, bonding, nem, 200, 200, 8);

    CHECK(acc.bulk > 0.0);
    CHECK(direct.total >= acc.bulk - acc.bracket);
    CHECK(direct.total <= acc.bulk + acc.bracket);
}

TEST_CASE("grain accounting: positive channels, gap within the bracket") {
    const MaterialParams mat(1.0, 1.0);
    const ScalingParams sc = ScalingParams::ladder(0.2);
    const std::array<double, 2> lo = {0.0, 0.0};
    const std::array<double, 2> hi = {2.0, 2.0};
    const std::array<double, 2> ubar = {1.0, 0.0};

    const NematicRecovery nem = build_recovery_nematic(ubar, mat, sc, lo, hi);
    const HApproximant h = build_h_approximant(lo, hi, nem.qbar(2, 2), mat, sc.eps);
    const GrainAccounting acc = grain_accounting(nem, h, ubar);

    CHECK(acc.dist_sq == doctest::Approx(foundation_density(ubar, mat)).epsilon(1e-9));
    CHECK(acc.bulk == doctest::Approx(0.5 * 4.0 * acc.dist_sq).epsilon(1e-12));
    CHECK(acc.film > 0.0);
    CHECK(acc.collar > 0.0);
    CHECK(acc.curvature > 0.0);
    CHECK(acc.total == doctest::Approx(acc.bulk + acc.film + acc.collar + acc.curvature)
                           .epsilon(1e-12));
    const double gap = acc.total - acc.bulk;
    CHECK(gap > 0.0);
    CHECK(gap <= acc.bracket);
    for (int i = 0; i < 4; ++i) {
        CHECK(acc.buckets[static_cast<std::size_t>(i)] >= 0.0);
        CHECK(acc.terms[static_cast<std::size_t>(i)] > 0.0);
    }
}

TEST_CASE("thickness sweep: gap decreases inside a shrinking bracket") {
    const MaterialParams mat(1.0, 1.0);
    const std::array<double, 2> lo = {0.0, 0.0};
    const std::array<double, 2> hi = {2.0, 2.0};

    SUBCASE("stretched state beyond the plateau") {
        const GammaSweepReport rep = gamma_sweep({1.0, 0.0}, mat, lo, hi, {0.2, 0.1});
        REQUIRE(rep.rows.size() == 2);
        CHECK(rep.dist_sq == doctest::Approx(0.0399216039).epsilon(1e-8));
        CHECK(rep.uniaxial_residual <= 1e-10);
        CHECK(rep.mean_residual <= 1e-12);
        CHECK(rep.c_meas > 0.0);
        for (const auto& row : rep.rows) {
            CHECK(row.e0 == doctest::Approx(0.5 * 4.0 * rep.dist_sq).epsilon(1e-12));
            CHECK(row.bulk == doctest::Approx(row.e0).epsilon(1e-12));
            CHECK(row.gap > 0.0);
            CHECK(row.gap <= row.bracket);
            CHECK(row.total == doctest::Approx(row.bulk + row.gap).epsilon(1e-12));
            CHECK(row.gap == doctest::Approx(row.film + row.collar + row.curvature)
                                 .epsilon(1e-12));
        }
        CHECK(rep.rows[1].gap < rep.rows[0].gap);
        CHECK(rep.rows[1].bracket < rep.rows[0].bracket);
        const ScalingParams sc = ScalingParams::ladder(0.2);
        CHECK(rep.rows[0].eta == doctest::Approx(sc.eta).epsilon(1e-15));
        CHECK(rep.rows[0].rho == doctest::Approx(sc.rho).epsilon(1e-15));
    }

    SUBCASE("relaxed state on the plateau still pays for its oscillation") {
        const GammaSweepReport rep = gamma_sweep({0.0, 0.0}, mat, lo, hi, {0.1, 0.05});
        REQUIRE(rep.rows.size() == 2);
        CHECK(rep.dist_sq <= 1e-12);
        for (const auto& row : rep.rows) {
            CHECK(row.e0 <= 1e-12);
            CHECK(row.gap > 1e-3);
            CHECK(row.gap <= row.bracket);
        }
        CHECK(rep.rows[1].gap < rep.rows[0].gap);
    }

    SUBCASE("curvature channel halves with the ladder scale, roughly") {
        const GammaSweepReport rep = gamma_sweep({0.5, 0.0}, mat, lo, hi, {0.2, 0.1});
        REQUIRE(rep.rows.size() == 2);
        const double ratio = rep.rows[0].curvature / rep.rows[1].curvature;
        CHECK(ratio >= 1.0);
        CHECK(ratio <= 4.0);
    }
}

TEST_CASE("clamped slab fields satisfy the transverse Poincare bound") {
    const auto cases = poincare_check(100, 4242);
    REQUIRE(cases.size() == 100);
    for (const auto& c : cases) {
        CHECK(c.lhs <= c.rhs);
        CHECK(c.rhs > 0.0);
    }
    CHECK_THROWS_AS(poincare_check(0, 1), ValidationError);
}
