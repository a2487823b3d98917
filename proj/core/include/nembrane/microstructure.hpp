#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "nembrane/qtensor.hpp"
#include "nembrane/sym3.hpp"

namespace nembrane {

// Small dense 3x3 matrix (row-major), used for the non-symmetric laminate
// gradients and frame rotations.
struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};

    static Mat3 zero() { return {}; }

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }

    static Mat3 from_columns(const std::array<double, 3>& c0,
                             const std::array<double, 3>& c1,
                             const std::array<double, 3>& c2) {
        Mat3 r;
        for (int i = 0; i < 3; ++i) {
            r.m[i][0] = c0[i];
            r.m[i][1] = c1[i];
            r.m[i][2] = c2[i];
        }
        return r;
    }

    double operator()(int i, int j) const { return m[i][j]; }
    double& operator()(int i, int j) { return m[i][j]; }

    std::array<double, 3> apply(const std::array<double, 3>& x) const {
        return {m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2],
                m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2],
                m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2]};
    }

    // Applies the transpose, i.e. x^T M as a column vector.
    std::array<double, 3> apply_transposed(const std::array<double, 3>& x) const {
        return {m[0][0] * x[0] + m[1][0] * x[1] + m[2][0] * x[2],
                m[0][1] * x[0] + m[1][1] * x[1] + m[2][1] * x[2],
                m[0][2] * x[0] + m[1][2] * x[1] + m[2][2] * x[2]};
    }

    Mat3 transpose() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    Mat3 mul(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
        return r;
    }

    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
        return r;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
        return r;
    }

    Mat3 operator*(double s) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] * s;
        return r;
    }

    SymTensor3 sym() const {
        return {m[0][0], m[1][1], m[2][2],
                0.5 * (m[0][1] + m[1][0]),
                0.5 * (m[0][2] + m[2][0]),
                0.5 * (m[1][2] + m[2][1])};
    }

    double frobenius() const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += m[i][j] * m[i][j];
        return std::sqrt(s);
    }
};

// Sorted spectrum of a traceless target, a <= b <= c with a + b + c = 0.
struct DiagonalTarget {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

using Rotation3 = Mat3;  // columns are the eigenframe, determinant +1

// Spectrum plus the frame in which the target is diagonal:
// Q = R diag(a,b,c) R^T.
std::pair<DiagonalTarget, Rotation3> diagonalize_target(const QTensor& Q);

// Frame change R S R^T of a symmetric tensor.
SymTensor3 conjugate_sym(const Mat3& R, const SymTensor3& S);

// Below this margin on a + 1/3 the slanted construction degenerates into
// flat slabs (the lamination period diverges).
inline constexpr double kDegenerateThreshold = 1e-8;

// Slant period T = sqrt((c + 1/3)/(a + 1/3)).  Throws DegenerateCase when
// a + 1/3 <= threshold.
double lamination_period(const DiagonalTarget& t);

// Four gradient matrices whose symmetric parts are uniaxial (spectrum
// {-1/3, -1/3, 2/3}) and whose equal-weight mean is diag(a, b, c).
struct LaminateBasis {
    std::array<Mat3, 4> G;            // G[j] pairs with cell type j+1
    DiagonalTarget target;
    bool degenerate = false;          // slab branch (a at the -1/3 wall)
    double period = 0.0;              // T; unused on the slab branch
};

LaminateBasis build_laminate_basis(const DiagonalTarget& t);

// Axis-aligned box.
struct Box3 {
    std::array<double, 3> lo{-1.0, -1.0, -1.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};
};

// Analytic cell lookup for the periodic pattern at oscillation frequency n,
// valid at any point (no bounding box).  Generic case: bands of unit height
// 1/n in x3 holding slanted rhomboid prisms; even bands slant with slope
// -T, odd bands with +T, and the in-band index parity selects the type.
// Degenerate case: flat unit-height slabs with the type given by the slab
// index mod 4.
struct PatternSampler {
    LaminateBasis basis;
    int n = 1;

    // Lattice coordinates of the cell containing x: (band, slant/slab
    // index, x2 layer).
    struct CellKey {
        std::int64_t band = 0;
        std::int64_t index = 0;
        std::int64_t layer = 0;
        int type = 1;
    };

    CellKey locate(const std::array<double, 3>& x) const;

    // Gradient matrix of the cell containing x.
    const Mat3& gradient_at(const std::array<double, 3>& x) const;

    // Symmetrized gradient as an order tensor.
    QTensor sample(const std::array<double, 3>& x) const;

    // Euclidean distance from x to the nearest jump-carrying face of its
    // cell, together with the type on the far side.  Faces with identical
    // gradients on both sides (lateral/x2 faces) carry no jump and are
    // skipped.  second_distance reports the next-nearest jump face, used to
    // detect junction neighborhoods.
    struct FaceProbe {
        double distance = 0.0;
        double second_distance = 0.0;
        int neighbor_type = 1;
        int second_neighbor_type = 1;
    };
    FaceProbe nearest_jump_face(const std::array<double, 3>& x) const;

    // Piecewise-affine potential with gradient equal to gradient_at
    // everywhere and f - diag(a,b,c).x bounded by C/n: closed-form periodic
    // offsets.  Continuous across every interface.
    std::array<double, 3> potential(const std::array<double, 3>& x) const;

    // Sup of |potential(x) - diag(a,b,c).x| over all space.
    double potential_deviation_bound() const;

    // Smallest distance between parallel jump-carrying faces of one cell
    // (the mollification budget).
    double min_face_separation() const;
};

// One clipped cell of an explicit tiling: a convex polygon in the (x1,x3)
// plane extruded over an x2 interval.
struct TilingCell {
    int type = 1;
    PatternSampler::CellKey key;
    std::vector<std::array<double, 2>> poly;  // CCW in (x1, x3)
    double y0 = 0.0, y1 = 0.0;                // x2 extent
    double area = 0.0;                        // polygon area
    double volume = 0.0;                      // area * (y1 - y0)
};

// Shared face between two cells; normal points from cell a into cell b.
struct TilingInterface {
    int cell_a = 0;
    int cell_b = 0;
    std::array<double, 3> normal{0.0, 0.0, 1.0};
    std::array<double, 3> point{};            // representative interior point
    double area = 0.0;
    std::array<double, 2> seg_p0{}, seg_p1{}; // (x1,x3) endpoints (in-plane faces)
    bool in_plane = true;                     // false: face at constant x2
};

// Explicit cell decomposition of box at frequency n.  Cells are pairwise
// disjoint and cover the box up to clipping arithmetic; partial cells are
// kept with their exact clipped volumes.
struct Tiling {
    PatternSampler sampler;
    Box3 box;
    std::vector<TilingCell> cells;
    std::vector<TilingInterface> interfaces;

    double box_volume() const;
    double cells_volume() const;
};

Tiling build_tiling(const LaminateBasis& basis, int n, const Box3& box);

// Cell index containing x; points on shared boundaries resolve to the
// lowest cell index among the incident cells.  Returns -1 outside the box.
int locate_cell(const Tiling& tiling, const std::array<double, 3>& x);

// Order tensor of the cell containing x (lowest-index rule on interfaces).
QTensor sample_Qn(const Tiling& tiling, const std::array<double, 3>& x);

// Volume-weighted average of the sampled tensor over window ∩ box, using
// exact clipped cell volumes.
SymTensor3 average_Qn(const Tiling& tiling, const Box3& window);

struct HadamardReport {
    int interfaces = 0;
    double max_sigma2 = 0.0;             // largest second singular value
    double max_direction_residual = 0.0; // | (Gb-Ga) - a ⊗ ν |_F max
};

// Verifies every interface jump is rank-one with its amplitude along the
// face normal.  Throws IncompatiblePair naming the offending pair.
HadamardReport check_hadamard(const Tiling& tiling, double tol = 1e-10);

// Continuous piecewise-affine map f with ∇f = G_type on each cell,
// assembled by breadth-first offset propagation across the interface graph.
struct PWAffineMap {
    const Tiling* tiling = nullptr;
    std::vector<std::array<double, 3>> offset;  // per cell
    double max_loop_residual = 0.0;

    std::array<double, 3> evaluate(const std::array<double, 3>& x) const;
    std::array<double, 3> evaluate_cell(int cell, const std::array<double, 3>& x) const;
};

// Throws InconsistentLoop if closing any non-tree interface disagrees with
// the propagated offsets beyond tol.
PWAffineMap build_fn(const Tiling& tiling, double tol = 1e-10);

// Mollified sampler: away from jump faces it returns the cell tensor; in a
// width-delta layer it lifts both sides to directors and blends them along
// the sphere, reaching the midpoint on the face.  delta is measured in the
// tiling's own scale; values above half the cell's face separation throw
// DeltaTooLarge.  Junction neighborhoods (two jump faces within delta)
// blend toward the lowest adjacent cell type.
struct MollifiedField {
    PatternSampler sampler;
    double delta = 0.0;

    QTensor sample(const std::array<double, 3>& x) const;
};

MollifiedField mollify_field(const PatternSampler& sampler, double delta);

struct WeakConvergenceRow {
    int n = 0;
    double window_avg_dev = 0.0;  // |window average - target|_F
    double sup_dev = 0.0;         // centered sup |f_n - target.x| over window
};

struct WeakConvergenceReport {
    std::vector<WeakConvergenceRow> rows;
    double avg_slope = 0.0;  // log-log slope of window_avg_dev vs n
    double sup_slope = 0.0;  // log-log slope of sup_dev vs n
};

// Builds tilings at each frequency over the window and measures both the
// window-average deviation from the target and the centered sup deviation
// of the compatible map from its affine limit.
WeakConvergenceReport weak_convergence_report(const DiagonalTarget& target,
                                              const std::vector<int>& ns,
                                              const Box3& window);

}  // namespace nembrane
