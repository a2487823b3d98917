#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "nembrane/errors.hpp"
#include "nembrane/microstructure.hpp"
#include "nembrane/qtensor.hpp"
#include "test_support.hpp"

using namespace nembrane;
using namespace nembrane::testing;

namespace {

double det3(const Mat3& R) {
    return R(0, 0) * (R(1, 1) * R(2, 2) - R(1, 2) * R(2, 1)) -
           R(0, 1) * (R(1, 0) * R(2, 2) - R(1, 2) * R(2, 0)) +
           R(0, 2) * (R(1, 0) * R(2, 1) - R(1, 1) * R(2, 0));
}

// Rejection-sampled target whose lamination period stays moderate.
DiagonalTarget moderate_target(std::mt19937_64& rng) {
    while (true) {
        const QTensor Q = random_biaxial(rng);
        const auto [t, R] = diagonalize_target(Q);
        if (t.a + 1.0 / 3.0 > 0.05) return t;
    }
}

Box3 period_box(const LaminateBasis& basis) {
    Box3 box;
    box.lo = {0.0, 0.0, 0.0};
    const double width = basis.degenerate ? 4.0 : 2.0 * basis.period;
    box.hi = {width, 1.0, basis.degenerate ? 4.0 : 2.0};
    return box;
}

}  // namespace

TEST_CASE("lamination period frozen values and degenerate guard") {
    CHECK(lamination_period({0.0, 0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lamination_period({-1.0 / 6.0, -1.0 / 6.0, 1.0 / 3.0}) ==
          doctest::Approx(2.0).epsilon(1e-13));
    CHECK_THROWS_AS(lamination_period({-1.0 / 3.0, 0.0, 1.0 / 3.0}), DegenerateCase);
    CHECK_THROWS_AS(lamination_period({-1.0 / 3.0 + 1e-9, 0.0, 1.0 / 3.0 - 1e-9}),
                    DegenerateCase);
}

TEST_CASE("laminate basis for the isotropic target") {
    const LaminateBasis basis = build_laminate_basis({0.0, 0.0, 0.0});
    CHECK_FALSE(basis.degenerate);
    CHECK(basis.period == doctest::Approx(1.0).epsilon(1e-14));

    const Mat3& G1 = basis.G[0];
    CHECK(G1(0, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(G1(1, 0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));
    CHECK(G1(1, 2) == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));
    for (int i = 0; i < 3; ++i) CHECK(G1(i, i) == 0.0);
    CHECK(G1(0, 1) == 0.0);
    CHECK(G1(2, 0) == 0.0);
    CHECK(G1(2, 1) == 0.0);

    Mat3 mean;
    for (const Mat3& G : basis.G) mean = mean + G * 0.25;
    CHECK(mean.frobenius() <= 1e-13);

    for (const Mat3& G : basis.G) {
        const EigenDecomp ed = eig_sym3(G.sym());
        CHECK(std::abs(ed.eigenvalues[0] + 1.0 / 3.0) <= 1e-12);
        CHECK(std::abs(ed.eigenvalues[1] + 1.0 / 3.0) <= 1e-12);
        CHECK(std::abs(ed.eigenvalues[2] - 2.0 / 3.0) <= 1e-12);
    }
}

TEST_CASE("spectrum and mean identities over random biaxial targets") {
    std::mt19937_64 rng(2121);
    for (int trial = 0; trial < 300; ++trial) {
        const QTensor Q = random_biaxial(rng);
        const auto [t, R] = diagonalize_target(Q);
        const LaminateBasis basis = build_laminate_basis(t);

        for (const Mat3& G : basis.G) {
            const EigenDecomp ed = eig_sym3(G.sym());
            CHECK(std::abs(ed.eigenvalues[0] + 1.0 / 3.0) <= 1e-10);
            CHECK(std::abs(ed.eigenvalues[1] + 1.0 / 3.0) <= 1e-10);
            CHECK(std::abs(ed.eigenvalues[2] - 2.0 / 3.0) <= 1e-10);
        }

        Mat3 mean;
        for (const Mat3& G : basis.G) mean = mean + G * 0.25;
        Mat3 diag;
        diag(0, 0) = t.a;
        diag(1, 1) = t.b;
        diag(2, 2) = t.c;
        CHECK((mean - diag).frobenius() <= 1e-12);
    }
}

TEST_CASE("diagonalization round trip and precondition") {
    std::mt19937_64 rng(2222);
    for (int trial = 0; trial < 100; ++trial) {
        const QTensor Q = random_biaxial(rng);
        const auto [t, R] = diagonalize_target(Q);
        CHECK(t.a <= t.b + 1e-14);
        CHECK(t.b <= t.c + 1e-14);
        CHECK(std::abs(t.a + t.b + t.c) <= 1e-12);
        CHECK(std::abs(det3(R) - 1.0) <= 1e-10);

        const Mat3 RtR = R.transpose().mul(R);
        CHECK((RtR - Mat3::identity()).frobenius() <= 1e-10);

        const SymTensor3 rebuilt = conjugate_sym(R, SymTensor3::diagonal(t.a, t.b, t.c));
        CHECK((rebuilt - Q.t).frobenius() <= 1e-10);
    }

    {
        const auto [t, R] = diagonalize_target(QTensor());
        CHECK(std::abs(t.a) <= 1e-14);
        CHECK(std::abs(t.c) <= 1e-14);
    }

    CHECK_THROWS_AS(diagonalize_target(QTensor(SymTensor3::diagonal(0.8, -0.4, -0.4))),
                    NotBiaxial);
}

TEST_CASE("degenerate branch produces slabs with period four") {
    const DiagonalTarget t{-1.0 / 3.0, 0.0, 1.0 / 3.0};
    const LaminateBasis basis = build_laminate_basis(t);
    CHECK(basis.degenerate);

    for (const Mat3& G : basis.G) {
        const EigenDecomp ed = eig_sym3(G.sym());
        CHECK(std::abs(ed.eigenvalues[0] + 1.0 / 3.0) <= 1e-10);
        CHECK(std::abs(ed.eigenvalues[2] - 2.0 / 3.0) <= 1e-10);
    }
    Mat3 mean;
    for (const Mat3& G : basis.G) mean = mean + G * 0.25;
    Mat3 diag;
    diag(0, 0) = t.a;
    diag(1, 1) = t.b;
    diag(2, 2) = t.c;
    CHECK((mean - diag).frobenius() <= 1e-12);

    const PatternSampler sampler{basis, 1};
    std::mt19937_64 rng(2323);
    for (int trial = 0; trial < 50; ++trial) {
        const std::array<double, 3> x = {uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0),
                                         uniform(rng, -3.0, 3.0)};
        const QTensor here = sampler.sample(x);
        const QTensor shifted = sampler.sample({x[0], x[1], x[2] + 4.0});
        CHECK((here.t - shifted.t).frobenius() <= 1e-14);
        const QTensor lateral = sampler.sample({x[0] + 0.37, x[1], x[2]});
        CHECK(is_uniaxial(here, 1e-10));
        (void)lateral;
    }
}

TEST_CASE("tiling covers the box with equal-volume types") {
    std::mt19937_64 rng(2424);

    SUBCASE("isotropic target, frequency one") {
        const LaminateBasis basis = build_laminate_basis({0.0, 0.0, 0.0});
        const Tiling tiling = build_tiling(basis, 1, period_box(basis));

        CHECK(std::abs(tiling.cells_volume() - tiling.box_volume()) <=
              1e-12 * tiling.box_volume());

        std::array<double, 4> type_volume{};
        for (const TilingCell& c : tiling.cells)
            type_volume[static_cast<std::size_t>(c.type - 1)] += c.volume;
        for (const double v : type_volume)
            CHECK(v == doctest::Approx(tiling.box_volume() / 4.0).epsilon(1e-10));

        bool saw_slanted = false;
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        for (const TilingInterface& f : tiling.interfaces) {
            if (!f.in_plane) continue;
            const double n1 = std::abs(f.normal[0]);
            const double n3 = std::abs(f.normal[2]);
            if (n1 > 0.1) {
                CHECK(n1 == doctest::Approx(inv_sqrt2).epsilon(1e-10));
                CHECK(n3 == doctest::Approx(inv_sqrt2).epsilon(1e-10));
                saw_slanted = true;
            }
        }
        CHECK(saw_slanted);
    }

    SUBCASE("random targets and frequencies") {
        for (int trial = 0; trial < 5; ++trial) {
            const DiagonalTarget t = moderate_target(rng);
            const LaminateBasis basis = build_laminate_basis(t);
            for (const int n : {1, 3}) {
                const Tiling tiling = build_tiling(basis, n, period_box(basis));
                CHECK(std::abs(tiling.cells_volume() - tiling.box_volume()) <=
                      1e-11 * tiling.box_volume());
            }
        }
    }

    SUBCASE("doubling the frequency quadruples the in-plane cell count") {
        const LaminateBasis basis = build_laminate_basis({0.0, 0.0, 0.0});
        Box3 box;
        box.lo = {0.0, 0.0, 0.0};
        box.hi = {8.0, 0.4, 8.0};
        const auto count = [&](int n) {
            return static_cast<double>(build_tiling(basis, n, box).cells.size());
        };
        const double ratio = count(2) / count(1);
        CHECK(ratio >= 3.4);
        CHECK(ratio <= 4.6);
    }
}

TEST_CASE("pattern samples are uniaxial and average back to the target") {
    std::mt19937_64 rng(2525);
    for (int trial = 0; trial < 4; ++trial) {
        const DiagonalTarget t = trial == 0 ? DiagonalTarget{0.0, 0.0, 0.0}
                                            : moderate_target(rng);
        const LaminateBasis basis = build_laminate_basis(t);
        const Box3 box = period_box(basis);
        const Tiling tiling = build_tiling(basis, 1, box);

        std::set<int> types_seen;
        for (int probe = 0; probe < 200; ++probe) {
            const std::array<double, 3> x = {uniform(rng, box.lo[0], box.hi[0]),
                                             uniform(rng, box.lo[1], box.hi[1]),
                                             uniform(rng, box.lo[2], box.hi[2])};
            const int cell = locate_cell(tiling, x);
            if (cell < 0) continue;
            const QTensor q = sample_Qn(tiling, x);
            CHECK(is_uniaxial(q, 1e-10));
            types_seen.insert(tiling.cells[static_cast<std::size_t>(cell)].type);
            const SymTensor3 expect =
                basis.G[static_cast<std::size_t>(
                            tiling.cells[static_cast<std::size_t>(cell)].type - 1)]
                    .sym();
            CHECK((q.t - expect).frobenius() <= 1e-12);
        }
        CHECK(types_seen.size() == 4);

        const SymTensor3 avg = average_Qn(tiling, box);
        const SymTensor3 diag = SymTensor3::diagonal(t.a, t.b, t.c);
        CHECK((avg - diag).frobenius() <= 1e-10);

        CHECK_THROWS_AS(sample_Qn(tiling, {box.hi[0] + 1.0, 0.5, 0.5}), OutOfDomain);
        CHECK(locate_cell(tiling, {box.hi[0] + 1.0, 0.5, 0.5}) == -1);
    }
}

TEST_CASE("every interface satisfies the rank-one jump condition") {
    std::mt19937_64 rng(2626);
    for (int trial = 0; trial < 5; ++trial) {
        const DiagonalTarget t = trial == 0 ? DiagonalTarget{-1.0 / 3.0, 0.1, 1.0 / 3.0 - 0.1}
                                            : moderate_target(rng);
        const LaminateBasis basis = build_laminate_basis(t);
        for (const int n : {1, 4}) {
            const Tiling tiling = build_tiling(basis, n, period_box(basis));
            const HadamardReport report = check_hadamard(tiling);
            CHECK(report.interfaces > 0);
            CHECK(report.max_sigma2 <= 1e-10);
            CHECK(report.max_direction_residual <= 1e-9);
        }
    }
}

TEST_CASE("compatible map is continuous with the prescribed gradients") {
    std::mt19937_64 rng(2727);
    const DiagonalTarget t = moderate_target(rng);
    const LaminateBasis basis = build_laminate_basis(t);
    const Box3 box = period_box(basis);
    const Tiling tiling = build_tiling(basis, 2, box);
    const PWAffineMap fn = build_fn(tiling);

    CHECK(fn.max_loop_residual <= 1e-10);

    for (const TilingInterface& f : tiling.interfaces) {
        const auto va = fn.evaluate_cell(f.cell_a, f.point);
        const auto vb = fn.evaluate_cell(f.cell_b, f.point);
        const double mismatch = std::sqrt((va[0] - vb[0]) * (va[0] - vb[0]) +
                                          (va[1] - vb[1]) * (va[1] - vb[1]) +
                                          (va[2] - vb[2]) * (va[2] - vb[2]));
        CHECK(mismatch <= 1e-10);
    }

    for (int probe = 0; probe < 50; ++probe) {
        const std::array<double, 3> x = {uniform(rng, box.lo[0], box.hi[0]),
                                         uniform(rng, box.lo[1], box.hi[1]),
                                         uniform(rng, box.lo[2], box.hi[2])};
        const int cell = locate_cell(tiling, x);
        if (cell < 0) continue;
        const auto direct = fn.evaluate(x);
        const auto via_cell = fn.evaluate_cell(cell, x);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(direct[i] - via_cell[i]) <= 1e-12);

        const Mat3& G = basis.G[static_cast<std::size_t>(
            tiling.cells[static_cast<std::size_t>(cell)].type - 1)];
        const double h = 1e-7;
        for (int d = 0; d < 3; ++d) {
            std::array<double, 3> xp = x;
            xp[static_cast<std::size_t>(d)] += h;
            const auto vp = fn.evaluate_cell(cell, xp);
            for (int i = 0; i < 3; ++i)
                CHECK(std::abs((vp[i] - via_cell[i]) / h - G(i, d)) <= 1e-6);
        }
    }
}

TEST_CASE("weak convergence: exact on period windows, first order on generic ones") {
    const DiagonalTarget zero{0.0, 0.0, 0.0};

    SUBCASE("full-period window averages exactly") {
        Box3 window;
        window.lo = {0.0, 0.0, 0.0};
        window.hi = {2.0, 1.0, 2.0};
        const WeakConvergenceReport report = weak_convergence_report(zero, {1, 2, 4}, window);
        for (const WeakConvergenceRow& row : report.rows) CHECK(row.window_avg_dev <= 1e-10);
    }

    SUBCASE("generic window decays at rate one in both norms") {
        Box3 window;
        window.lo = {0.0, 0.0, 0.0};
        window.hi = {1.3, 0.7, 1.7};
        const WeakConvergenceReport report =
            weak_convergence_report(zero, {4, 8, 16, 32}, window);
        CHECK(report.avg_slope >= -1.3);
        CHECK(report.avg_slope <= -0.7);
        CHECK(report.sup_slope >= -1.3);
        CHECK(report.sup_slope <= -0.7);
        for (std::size_t i = 1; i < report.rows.size(); ++i)
            CHECK(report.rows[i].sup_dev < report.rows[i - 1].sup_dev);
    }

    SUBCASE("window inside a single cell sees the raw deviation") {
        Box3 window;
        window.lo = {0.35, 0.1, 0.1};
        window.hi = {0.60, 0.3, 0.3};
        const WeakConvergenceReport report = weak_convergence_report(zero, {1, 2}, window);
        CHECK(report.rows.size() == 2);
        CHECK(report.rows[0].window_avg_dev ==
              doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-6));
    }

    SUBCASE("a single frequency cannot carry a slope estimate") {
        CHECK_THROWS_AS(weak_convergence_report(zero, {1}, Box3{}), ValidationError);
    }
}

TEST_CASE("mollified field is uniaxial, sharp off layers, with a uniform gradient bound") {
    std::mt19937_64 rng(2828);
    const LaminateBasis basis = build_laminate_basis({0.0, 0.0, 0.0});
    const PatternSampler sampler{basis, 1};
    const double cell = sampler.min_face_separation();
    CHECK(cell > 0.0);

    CHECK_THROWS_AS(mollify_field(sampler, 0.9 * cell), DeltaTooLarge);

    double fd_scaled_max[2] = {0.0, 0.0};
    const double deltas[2] = {1e-2 * cell, 1e-3 * cell};
    for (int k = 0; k < 2; ++k) {
        const double delta = deltas[k];
        const MollifiedField field = mollify_field(sampler, delta);
        for (int probe = 0; probe < 400; ++probe) {
            const std::array<double, 3> x = {uniform(rng, 0.0, 2.0), uniform(rng, 0.0, 1.0),
                                             uniform(rng, 0.0, 2.0)};
            const QTensor q = field.sample(x);
            CHECK(is_uniaxial(q, 1e-8));
            if (sampler.nearest_jump_face(x).distance > delta) {
                CHECK((q.t - sampler.sample(x).t).frobenius() <= 1e-13);
            }
        }

        const double h = delta / 10.0;
        for (int probe = 0; probe < 400; ++probe) {
            std::array<double, 3> x = {uniform(rng, 0.0, 2.0), uniform(rng, 0.0, 1.0),
                                       uniform(rng, 0.0, 2.0)};
            const auto face = sampler.nearest_jump_face(x);
            if (face.distance > 2.0 * delta) continue;
            for (int d = 0; d < 3; ++d) {
                std::array<double, 3> xp = x;
                xp[static_cast<std::size_t>(d)] += h;
                const double diff =
                    (field.sample(xp).t - field.sample(x).t).frobenius() / h;
                fd_scaled_max[k] = std::max(fd_scaled_max[k], diff * delta);
            }
        }
    }
    CHECK(fd_scaled_max[0] <= 6.0);
    CHECK(fd_scaled_max[1] <= 6.0);
    CHECK(fd_scaled_max[1] > 0.0);
}
