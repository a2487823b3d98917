#include "nembrane/microstructure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <tuple>

#include "nembrane/errors.hpp"

namespace nembrane {

namespace {

constexpr double kThird = 1.0 / 3.0;

double mod2(double t) { return t - 2.0 * std::floor(0.5 * t); }

// 2-periodic triangle wave, 0 at even integers, 1 at odd ones.
double tri_wave(double t) { return 1.0 - std::abs(1.0 - mod2(t)); }

// 2-periodic sawtooth companion, 0 at even integers, -1 at odd ones.
double saw_wave(double t) { return std::abs(1.0 - mod2(t)) - 1.0; }

std::int64_t ifloor(double v) { return static_cast<std::int64_t>(std::floor(v)); }

bool index_even(std::int64_t j) { return ((j % 2) + 2) % 2 == 0; }

int slab_type(std::int64_t k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return 1;
        case 1: return 4;
        case 2: return 3;
        default: return 2;
    }
}

double det3(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

using Pt2 = std::array<double, 2>;

double poly_area(const std::vector<Pt2>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Pt2& u = p[i];
        const Pt2& v = p[(i + 1) % p.size()];
        s += u[0] * v[1] - v[0] * u[1];
    }
    return 0.5 * s;
}

Pt2 poly_centroid(const std::vector<Pt2>& p) {
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Pt2& u = p[i];
        const Pt2& v = p[(i + 1) % p.size()];
        const double w = u[0] * v[1] - v[0] * u[1];
        a += w;
        cx += (u[0] + v[0]) * w;
        cy += (u[1] + v[1]) * w;
    }
    if (std::abs(a) < 1e-300) return p.empty() ? Pt2{0.0, 0.0} : p[0];
    return {cx / (3.0 * a), cy / (3.0 * a)};
}

// Keeps the part of a convex CCW polygon with a*x + b*z <= c.
std::vector<Pt2> clip_halfplane(const std::vector<Pt2>& in, double a, double b, double c) {
    std::vector<Pt2> out;
    out.reserve(in.size() + 1);
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Pt2& p = in[i];
        const Pt2& q = in[(i + 1) % n];
        const double fp = a * p[0] + b * p[1] - c;
        const double fq = a * q[0] + b * q[1] - c;
        if (fp <= 0.0) out.push_back(p);
        if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
            const double t = fp / (fp - fq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    return out;
}

std::vector<Pt2> clip_rect(std::vector<Pt2> poly, double x0, double x1, double z0, double z1) {
    poly = clip_halfplane(poly, -1.0, 0.0, -x0);
    poly = clip_halfplane(poly, 1.0, 0.0, x1);
    poly = clip_halfplane(poly, 0.0, -1.0, -z0);
    poly = clip_halfplane(poly, 0.0, 1.0, z1);
    return poly;
}

Mat3 diag_matrix(const DiagonalTarget& t) {
    Mat3 d = Mat3::zero();
    d(0, 0) = t.a;
    d(1, 1) = t.b;
    d(2, 2) = t.c;
    return d;
}

double norm3(const std::array<double, 3>& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

std::array<double, 3> sub3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

std::array<double, 3> add3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

}  // namespace

std::pair<DiagonalTarget, Rotation3> diagonalize_target(const QTensor& Q) {
    if (!is_biaxial(Q)) {
        throw NotBiaxial("diagonalize_target: eigenvalues outside [-1/3, 2/3]");
    }
    const EigenDecomp ed = eig_sym3(Q.t);
    DiagonalTarget t{ed.eigenvalues[0], ed.eigenvalues[1], ed.eigenvalues[2]};
    const double shift = (t.a + t.b + t.c) / 3.0;
    t.a -= shift;
    t.b -= shift;
    t.c -= shift;
    Rotation3 R = Mat3::from_columns(ed.eigenvectors[0], ed.eigenvectors[1], ed.eigenvectors[2]);
    if (det3(R) < 0.0) {
        for (int i = 0; i < 3; ++i) R(i, 2) = -R(i, 2);
    }
    return {t, R};
}

SymTensor3 conjugate_sym(const Mat3& R, const SymTensor3& S) {
    Mat3 full = Mat3::zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) full(i, j) = S(i, j);
    const Mat3 out = R.mul(full).mul(R.transpose());
    SymTensor3 result;
    result.a11 = out(0, 0);
    result.a22 = out(1, 1);
    result.a33 = out(2, 2);
    result.a12 = 0.5 * (out(0, 1) + out(1, 0));
    result.a13 = 0.5 * (out(0, 2) + out(2, 0));
    result.a23 = 0.5 * (out(1, 2) + out(2, 1));
    return result;
}

double lamination_period(const DiagonalTarget& t) {
    const double lo = t.a + kThird;
    if (lo <= kDegenerateThreshold) {
        std::ostringstream msg;
        msg << "lamination period diverges: smallest eigenvalue sits at the -1/3 wall "
            << "(a + 1/3 = " << lo << ")";
        throw DegenerateCase(msg.str());
    }
    return std::sqrt((t.c + kThird) / lo);
}

LaminateBasis build_laminate_basis(const DiagonalTarget& t_in) {
    DiagonalTarget t = t_in;
    if (!std::isfinite(t.a) || !std::isfinite(t.b) || !std::isfinite(t.c))
        throw ValidationError("target eigenvalues must be finite");
    if (t.a > t.b + 1e-12 || t.b > t.c + 1e-12)
        throw ValidationError("target eigenvalues must be sorted ascending");
    if (std::abs(t.a + t.b + t.c) > 1e-10)
        throw ValidationError("target eigenvalues must sum to zero");
    if (t.a < -kThird - 1e-10)
        throw ValidationError("smallest target eigenvalue lies below -1/3");

    const double shift = (t.a + t.b + t.c) / 3.0;
    t.a -= shift;
    t.b -= shift;
    t.c -= shift;

    LaminateBasis basis;
    basis.degenerate = (t.a + kThird <= kDegenerateThreshold);
    if (basis.degenerate) {
        // Pin a to the wall exactly and spread the residue so the trace
        // stays zero; the slab gradients then have an exact uniaxial
        // spectrum.
        const double slack = t.a + kThird;
        t.a = -kThird;
        t.b += 0.5 * slack;
        t.c += 0.5 * slack;
    }
    basis.target = t;

    const double ra = std::sqrt(std::max(t.a + kThird, 0.0));
    const double rb = std::sqrt(std::max(t.b + kThird, 0.0));
    const double rc = std::sqrt(std::max(t.c + kThird, 0.0));
    const double gab = ra * rb, gac = ra * rc, gbc = rb * rc;

    const auto make = [&](double s_ab, double s_ac, double s_bc) {
        Mat3 G = Mat3::zero();
        G(0, 0) = t.a;
        G(1, 1) = t.b;
        G(2, 2) = t.c;
        G(0, 2) = 2.0 * s_ac * gac;
        G(1, 0) = 2.0 * s_ab * gab;
        G(1, 2) = 2.0 * s_bc * gbc;
        return G;
    };

    if (basis.degenerate) {
        basis.period = 0.0;
        basis.G[0] = make(0.0, 0.0, -1.0);
        basis.G[1] = make(0.0, 0.0, +1.0);
        basis.G[2] = make(0.0, 0.0, -1.0);
        basis.G[3] = make(0.0, 0.0, +1.0);
    } else {
        basis.period = std::sqrt((t.c + kThird) / (t.a + kThird));
        basis.G[0] = make(-1.0, +1.0, -1.0);
        basis.G[1] = make(+1.0, +1.0, +1.0);
        basis.G[2] = make(-1.0, -1.0, +1.0);
        basis.G[3] = make(+1.0, -1.0, -1.0);
    }
    return basis;
}

PatternSampler::CellKey PatternSampler::locate(const std::array<double, 3>& x) const {
    const double y1 = n * x[0];
    const double y2 = n * x[1];
    const double y3 = n * x[2];
    CellKey key;
    key.layer = ifloor(0.5 * (y2 + 1.0));
    key.band = ifloor(y3);
    if (basis.degenerate) {
        key.index = ifloor(0.5 * (y1 + 1.0));
        key.type = slab_type(key.band);
    } else {
        const bool upper = index_even(key.band);
        const double ell = upper ? y1 / basis.period + y3 : y1 / basis.period - y3;
        key.index = ifloor(ell);
        const bool even = index_even(key.index);
        key.type = upper ? (even ? 1 : 2) : (even ? 3 : 4);
    }
    return key;
}

const Mat3& PatternSampler::gradient_at(const std::array<double, 3>& x) const {
    return basis.G[locate(x).type - 1];
}

QTensor PatternSampler::sample(const std::array<double, 3>& x) const {
    return QTensor::retraced(gradient_at(x).sym());
}

PatternSampler::FaceProbe PatternSampler::nearest_jump_face(const std::array<double, 3>& x) const {
    const CellKey key = locate(x);
    const double y1 = n * x[0];
    const double y3 = n * x[2];

    struct Cand {
        double d;
        int type;
    };
    std::array<Cand, 4> cand{};
    int count = 0;

    if (basis.degenerate) {
        cand[count++] = {y3 - static_cast<double>(key.band), slab_type(key.band - 1)};
        cand[count++] = {static_cast<double>(key.band + 1) - y3, slab_type(key.band + 1)};
    } else {
        const double T = basis.period;
        const bool upper = index_even(key.band);
        const double ell = upper ? y1 / T + y3 : y1 / T - y3;
        const double scale = T / std::sqrt(1.0 + T * T);
        const auto lateral_type = [&](std::int64_t jj) {
            const bool even = index_even(jj);
            return upper ? (even ? 1 : 2) : (even ? 3 : 4);
        };
        const int vertical_type =
            upper ? (index_even(key.index) ? 3 : 4) : (index_even(key.index) ? 1 : 2);
        cand[count++] = {(ell - static_cast<double>(key.index)) * scale, lateral_type(key.index - 1)};
        cand[count++] = {(static_cast<double>(key.index + 1) - ell) * scale, lateral_type(key.index + 1)};
        cand[count++] = {y3 - static_cast<double>(key.band), vertical_type};
        cand[count++] = {static_cast<double>(key.band + 1) - y3, vertical_type};
    }

    std::sort(cand.begin(), cand.begin() + count,
              [](const Cand& a, const Cand& b) { return a.d < b.d; });

    FaceProbe probe;
    probe.distance = cand[0].d / n;
    probe.neighbor_type = cand[0].type;
    probe.second_distance = cand[1].d / n;
    probe.second_neighbor_type = cand[1].type;
    return probe;
}

std::array<double, 3> PatternSampler::potential(const std::array<double, 3>& x) const {
    const DiagonalTarget& t = basis.target;
    const double y1 = n * x[0];
    const double y3 = n * x[2];
    const double rb = std::sqrt(std::max(t.b + kThird, 0.0));
    const double rc = std::sqrt(std::max(t.c + kThird, 0.0));
    const double gbc = rb * rc;

    std::array<double, 3> f{t.a * x[0], t.b * x[1], t.c * x[2]};
    if (basis.degenerate) {
        f[1] += 2.0 * gbc * saw_wave(y3) / n;
        return f;
    }
    const double ra = std::sqrt(std::max(t.a + kThird, 0.0));
    const double gac = ra * rc;
    const bool upper = index_even(ifloor(y3));
    const double ell = upper ? y1 / basis.period + y3 : y1 / basis.period - y3;
    f[0] += 2.0 * gac * tri_wave(y3) / n;
    f[1] += 2.0 * gbc * saw_wave(ell) / n;
    return f;
}

double PatternSampler::potential_deviation_bound() const {
    const DiagonalTarget& t = basis.target;
    const double rb = std::sqrt(std::max(t.b + kThird, 0.0));
    const double rc = std::sqrt(std::max(t.c + kThird, 0.0));
    const double gbc = rb * rc;
    if (basis.degenerate) return 2.0 * gbc / n;
    const double ra = std::sqrt(std::max(t.a + kThird, 0.0));
    const double gac = ra * rc;
    return 2.0 * std::sqrt(gac * gac + gbc * gbc) / n;
}

double PatternSampler::min_face_separation() const {
    if (basis.degenerate) return 1.0 / n;
    const double T = basis.period;
    return std::min(1.0, T / std::sqrt(1.0 + T * T)) / n;
}

double Tiling::box_volume() const {
    return (box.hi[0] - box.lo[0]) * (box.hi[1] - box.lo[1]) * (box.hi[2] - box.lo[2]);
}

double Tiling::cells_volume() const {
    double v = 0.0;
    for (const TilingCell& c : cells) v += c.volume;
    return v;
}

Tiling build_tiling(const LaminateBasis& basis, int n, const Box3& box) {
    if (n < 1) throw ValidationError("oscillation frequency must be at least 1");
    for (int d = 0; d < 3; ++d) {
        if (!(box.hi[d] > box.lo[d]))
            throw ValidationError("box must have positive extent in every direction");
    }

    Tiling tiling;
    tiling.sampler = PatternSampler{basis, n};
    tiling.box = box;

    const double invn = 1.0 / n;
    const double ylo1 = n * box.lo[0], yhi1 = n * box.hi[0];
    const double ylo2 = n * box.lo[1], yhi2 = n * box.hi[1];
    const double ylo3 = n * box.lo[2], yhi3 = n * box.hi[2];
    const double eps = 1e-9;

    struct Layer {
        std::int64_t m;
        double w0, w1;
    };
    std::vector<Layer> layers;
    for (std::int64_t m = ifloor(0.5 * (ylo2 + 1.0) - eps); m <= ifloor(0.5 * (yhi2 + 1.0) + eps);
         ++m) {
        const double w0 = std::max(static_cast<double>(2 * m - 1), ylo2);
        const double w1 = std::min(static_cast<double>(2 * m + 1), yhi2);
        if (w1 - w0 > 1e-12) layers.push_back({m, w0, w1});
    }

    std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, int> index_of;

    const auto add_cell = [&](std::int64_t band, std::int64_t idx, const Layer& layer, int type,
                              const std::vector<Pt2>& poly_y) {
        const double area_y = poly_area(poly_y);
        if (area_y <= 1e-12) return;
        TilingCell cell;
        cell.type = type;
        cell.key = {band, idx, layer.m, type};
        cell.poly.reserve(poly_y.size());
        for (const Pt2& p : poly_y) cell.poly.push_back({p[0] * invn, p[1] * invn});
        cell.y0 = layer.w0 * invn;
        cell.y1 = layer.w1 * invn;
        cell.area = area_y * invn * invn;
        cell.volume = cell.area * (cell.y1 - cell.y0);
        index_of[{band, idx, layer.m}] = static_cast<int>(tiling.cells.size());
        tiling.cells.push_back(std::move(cell));
    };

    if (basis.degenerate) {
        for (std::int64_t k = ifloor(ylo3 - eps); k <= ifloor(yhi3 + eps); ++k) {
            const double z0 = std::max(static_cast<double>(k), ylo3);
            const double z1 = std::min(static_cast<double>(k + 1), yhi3);
            if (z1 - z0 <= 1e-12) continue;
            for (std::int64_t j = ifloor(0.5 * (ylo1 + 1.0) - eps);
                 j <= ifloor(0.5 * (yhi1 + 1.0) + eps); ++j) {
                const double u0 = std::max(static_cast<double>(2 * j - 1), ylo1);
                const double u1 = std::min(static_cast<double>(2 * j + 1), yhi1);
                if (u1 - u0 <= 1e-12) continue;
                const std::vector<Pt2> quad{{u0, z0}, {u1, z0}, {u1, z1}, {u0, z1}};
                for (const Layer& layer : layers) add_cell(k, j, layer, slab_type(k), quad);
            }
        }
    } else {
        const double T = basis.period;
        for (std::int64_t r = ifloor(ylo3 - eps); r <= ifloor(yhi3 + eps); ++r) {
            const double z0 = std::max(static_cast<double>(r), ylo3);
            const double z1 = std::min(static_cast<double>(r + 1), yhi3);
            if (z1 - z0 <= 1e-12) continue;
            const bool upper = index_even(r);
            const double lmin = upper ? ylo1 / T + z0 : ylo1 / T - z1;
            const double lmax = upper ? yhi1 / T + z1 : yhi1 / T - z0;
            for (std::int64_t j = ifloor(lmin - eps); j <= ifloor(lmax + eps); ++j) {
                std::vector<Pt2> quad;
                const double rd = static_cast<double>(r);
                const double jd = static_cast<double>(j);
                if (upper) {
                    quad = {{T * (jd - rd), rd},
                            {T * (jd + 1.0 - rd), rd},
                            {T * (jd - rd), rd + 1.0},
                            {T * (jd - 1.0 - rd), rd + 1.0}};
                } else {
                    quad = {{T * (jd + rd), rd},
                            {T * (jd + rd + 1.0), rd},
                            {T * (jd + rd + 2.0), rd + 1.0},
                            {T * (jd + rd + 1.0), rd + 1.0}};
                }
                const std::vector<Pt2> clipped = clip_rect(quad, ylo1, yhi1, ylo3, yhi3);
                if (clipped.size() < 3) continue;
                const bool even = index_even(j);
                const int type = upper ? (even ? 1 : 2) : (even ? 3 : 4);
                for (const Layer& layer : layers) add_cell(r, j, layer, type, clipped);
            }
        }
    }

    const auto find_cell = [&](std::int64_t band, std::int64_t idx, std::int64_t m) {
        const auto it = index_of.find({band, idx, m});
        return it == index_of.end() ? -1 : it->second;
    };

    const auto add_face = [&](int a, int b, const std::array<double, 3>& normal,
                              const std::array<double, 3>& point, double area, const Pt2& p0,
                              const Pt2& p1, bool in_plane) {
        TilingInterface face;
        face.cell_a = a;
        face.cell_b = b;
        face.normal = normal;
        face.point = point;
        face.area = area;
        face.seg_p0 = p0;
        face.seg_p1 = p1;
        face.in_plane = in_plane;
        tiling.interfaces.push_back(face);
    };

    for (const auto& [key, ia] : index_of) {
        const auto [band, idx, m] = key;
        const TilingCell& cell = tiling.cells[ia];
        const double wy = cell.y1 - cell.y0;  // physical x2 width

        // Face toward the next x2 layer: same in-plane footprint, zero jump.
        if (const int ib = find_cell(band, idx, m + 1); ib >= 0) {
            const Pt2 cen = poly_centroid(cell.poly);
            const double x2 = static_cast<double>(2 * m + 1) * invn;
            add_face(ia, ib, {0.0, 1.0, 0.0}, {cen[0], x2, cen[1]}, cell.area, cen, cen, false);
        }

        if (basis.degenerate) {
            const double u0 = std::max(static_cast<double>(2 * idx - 1), ylo1);
            const double u1 = std::min(static_cast<double>(2 * idx + 1), yhi1);
            const double z0 = std::max(static_cast<double>(band), ylo3);
            const double z1 = std::min(static_cast<double>(band + 1), yhi3);
            // Slab above: the jump-carrying face.
            if (const int ib = find_cell(band + 1, idx, m); ib >= 0) {
                const double z = static_cast<double>(band + 1);
                const Pt2 p0{u0 * invn, z * invn};
                const Pt2 p1{u1 * invn, z * invn};
                add_face(ia, ib, {0.0, 0.0, 1.0},
                         {0.5 * (u0 + u1) * invn, 0.5 * (cell.y0 + cell.y1), z * invn},
                         (u1 - u0) * invn * wy, p0, p1, true);
            }
            // Lateral strip: zero jump.
            if (const int ib = find_cell(band, idx + 1, m); ib >= 0) {
                const double u = static_cast<double>(2 * idx + 1);
                const Pt2 p0{u * invn, z0 * invn};
                const Pt2 p1{u * invn, z1 * invn};
                add_face(ia, ib, {1.0, 0.0, 0.0},
                         {u * invn, 0.5 * (cell.y0 + cell.y1), 0.5 * (z0 + z1) * invn},
                         (z1 - z0) * invn * wy, p0, p1, true);
            }
            continue;
        }

        const double T = basis.period;
        const bool upper = index_even(band);
        const double rd = static_cast<double>(band);
        const double jd = static_cast<double>(idx);

        // Slanted face toward index + 1.
        if (const int ib = find_cell(band, idx + 1, m); ib >= 0) {
            double za, zb;
            if (upper) {
                za = std::max({rd, ylo3, jd + 1.0 - yhi1 / T});
                zb = std::min({rd + 1.0, yhi3, jd + 1.0 - ylo1 / T});
            } else {
                za = std::max({rd, ylo3, ylo1 / T - (jd + 1.0)});
                zb = std::min({rd + 1.0, yhi3, yhi1 / T - (jd + 1.0)});
            }
            if (zb - za > 1e-12) {
                const auto x1_at = [&](double z) {
                    return upper ? T * (jd + 1.0 - z) : T * (jd + 1.0 + z);
                };
                const double root = std::sqrt(1.0 + T * T);
                const std::array<double, 3> normal =
                    upper ? std::array<double, 3>{1.0 / root, 0.0, T / root}
                          : std::array<double, 3>{1.0 / root, 0.0, -T / root};
                const double zm = 0.5 * (za + zb);
                const Pt2 p0{x1_at(za) * invn, za * invn};
                const Pt2 p1{x1_at(zb) * invn, zb * invn};
                add_face(ia, ib, normal, {x1_at(zm) * invn, 0.5 * (cell.y0 + cell.y1), zm * invn},
                         (zb - za) * root * invn * wy, p0, p1, true);
            }
        }

        // Horizontal face toward the band above.
        const std::int64_t jup = upper ? idx - 2 * band - 2 : idx + 2 * band + 2;
        if (const int ib = find_cell(band + 1, jup, m); ib >= 0) {
            const double e0 = upper ? T * (jd - rd - 1.0) : T * (jd + rd + 1.0);
            const double e1 = e0 + T;
            const double u0 = std::max(e0, ylo1);
            const double u1 = std::min(e1, yhi1);
            if (u1 - u0 > 1e-12) {
                const double z = rd + 1.0;
                const Pt2 p0{u0 * invn, z * invn};
                const Pt2 p1{u1 * invn, z * invn};
                add_face(ia, ib, {0.0, 0.0, 1.0},
                         {0.5 * (u0 + u1) * invn, 0.5 * (cell.y0 + cell.y1), z * invn},
                         (u1 - u0) * invn * wy, p0, p1, true);
            }
        }
    }

    return tiling;
}

int locate_cell(const Tiling& tiling, const std::array<double, 3>& x) {
    const double tol = 1e-12;
    for (int d = 0; d < 3; ++d) {
        if (x[d] < tiling.box.lo[d] - tol || x[d] > tiling.box.hi[d] + tol) return -1;
    }
    for (std::size_t c = 0; c < tiling.cells.size(); ++c) {
        const TilingCell& cell = tiling.cells[c];
        if (x[1] < cell.y0 - tol || x[1] > cell.y1 + tol) continue;
        bool inside = true;
        const std::size_t nv = cell.poly.size();
        for (std::size_t i = 0; i < nv && inside; ++i) {
            const Pt2& p = cell.poly[i];
            const Pt2& q = cell.poly[(i + 1) % nv];
            const double cross = (q[0] - p[0]) * (x[2] - p[1]) - (q[1] - p[1]) * (x[0] - p[0]);
            if (cross < -tol) inside = false;
        }
        if (inside) return static_cast<int>(c);
    }
    return -1;
}

QTensor sample_Qn(const Tiling& tiling, const std::array<double, 3>& x) {
    const int c = locate_cell(tiling, x);
    if (c < 0) throw OutOfDomain("sample point lies outside the tiled box");
    return QTensor::retraced(tiling.sampler.basis.G[tiling.cells[c].type - 1].sym());
}

SymTensor3 average_Qn(const Tiling& tiling, const Box3& window) {
    double total = 0.0;
    SymTensor3 acc = SymTensor3::zero();
    for (const TilingCell& cell : tiling.cells) {
        const double w0 = std::max(cell.y0, window.lo[1]);
        const double w1 = std::min(cell.y1, window.hi[1]);
        if (w1 - w0 <= 0.0) continue;
        const std::vector<Pt2> clipped =
            clip_rect(cell.poly, window.lo[0], window.hi[0], window.lo[2], window.hi[2]);
        if (clipped.size() < 3) continue;
        const double vol = poly_area(clipped) * (w1 - w0);
        if (vol <= 0.0) continue;
        total += vol;
        acc = acc + tiling.sampler.basis.G[cell.type - 1].sym() * vol;
    }
    if (total <= 0.0) throw ValidationError("window does not intersect the tiled box");
    return acc * (1.0 / total);
}

HadamardReport check_hadamard(const Tiling& tiling, double tol) {
    HadamardReport report;
    report.interfaces = static_cast<int>(tiling.interfaces.size());
    for (const TilingInterface& face : tiling.interfaces) {
        const Mat3& Ga = tiling.sampler.basis.G[tiling.cells[face.cell_a].type - 1];
        const Mat3& Gb = tiling.sampler.basis.G[tiling.cells[face.cell_b].type - 1];
        const Mat3 J = Gb - Ga;

        SymTensor3 JtJ = SymTensor3::zero();
        JtJ.a11 = J(0, 0) * J(0, 0) + J(1, 0) * J(1, 0) + J(2, 0) * J(2, 0);
        JtJ.a22 = J(0, 1) * J(0, 1) + J(1, 1) * J(1, 1) + J(2, 1) * J(2, 1);
        JtJ.a33 = J(0, 2) * J(0, 2) + J(1, 2) * J(1, 2) + J(2, 2) * J(2, 2);
        JtJ.a12 = J(0, 0) * J(0, 1) + J(1, 0) * J(1, 1) + J(2, 0) * J(2, 1);
        JtJ.a13 = J(0, 0) * J(0, 2) + J(1, 0) * J(1, 2) + J(2, 0) * J(2, 2);
        JtJ.a23 = J(0, 1) * J(0, 2) + J(1, 1) * J(1, 2) + J(2, 1) * J(2, 2);
        // Reading sigma2 off the middle eigenvalue of J^T J floors it near
        // sqrt(machine eps) * sigma1; measuring J on the plane orthogonal to
        // the top right-singular direction keeps the error at rounding level.
        const EigenDecomp ed = eig_sym3(JtJ);
        const std::array<double, 3> c1 = J.apply(ed.eigenvectors[0]);
        const std::array<double, 3> c2 = J.apply(ed.eigenvectors[1]);
        const double g11 = c1[0] * c1[0] + c1[1] * c1[1] + c1[2] * c1[2];
        const double g22 = c2[0] * c2[0] + c2[1] * c2[1] + c2[2] * c2[2];
        const double g12 = c1[0] * c2[0] + c1[1] * c2[1] + c1[2] * c2[2];
        const double mean = 0.5 * (g11 + g22);
        const double disc = std::sqrt(0.25 * (g11 - g22) * (g11 - g22) + g12 * g12);
        const double sigma2 = std::sqrt(std::max(mean + disc, 0.0));
        report.max_sigma2 = std::max(report.max_sigma2, sigma2);

        const std::array<double, 3> amp = J.apply(face.normal);
        Mat3 residual = J;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) residual(i, j) -= amp[i] * face.normal[j];
        report.max_direction_residual =
            std::max(report.max_direction_residual, residual.frobenius());

        if (sigma2 > tol) {
            std::ostringstream msg;
            msg << "cells of types " << tiling.cells[face.cell_a].type << " and "
                << tiling.cells[face.cell_b].type
                << " share a face but their gradient jump is not rank-one (sigma2 = " << sigma2
                << ")";
            throw IncompatiblePair(msg.str());
        }
    }
    return report;
}

std::array<double, 3> PWAffineMap::evaluate_cell(int cell, const std::array<double, 3>& x) const {
    const TilingCell& c = tiling->cells[cell];
    return add3(tiling->sampler.basis.G[c.type - 1].apply(x), offset[cell]);
}

std::array<double, 3> PWAffineMap::evaluate(const std::array<double, 3>& x) const {
    const int c = locate_cell(*tiling, x);
    if (c < 0) throw OutOfDomain("evaluation point lies outside the tiled box");
    return evaluate_cell(c, x);
}

PWAffineMap build_fn(const Tiling& tiling, double tol) {
    const std::size_t nc = tiling.cells.size();
    if (nc == 0) throw ValidationError("tiling has no cells");

    std::vector<std::vector<int>> adjacency(nc);
    for (std::size_t i = 0; i < tiling.interfaces.size(); ++i) {
        adjacency[tiling.interfaces[i].cell_a].push_back(static_cast<int>(i));
        adjacency[tiling.interfaces[i].cell_b].push_back(static_cast<int>(i));
    }

    PWAffineMap map;
    map.tiling = &tiling;
    map.offset.assign(nc, {0.0, 0.0, 0.0});

    const Mat3 D = diag_matrix(tiling.sampler.basis.target);
    const TilingCell& root = tiling.cells[0];
    const Pt2 centroid = poly_centroid(root.poly);
    const std::array<double, 3> anchor{centroid[0], 0.5 * (root.y0 + root.y1), centroid[1]};
    map.offset[0] =
        sub3(D.apply(anchor), tiling.sampler.basis.G[root.type - 1].apply(anchor));

    std::vector<char> seen(nc, 0);
    seen[0] = 1;
    std::queue<int> queue;
    queue.push(0);
    std::size_t reached = 1;

    while (!queue.empty()) {
        const int a = queue.front();
        queue.pop();
        const Mat3& Ga = tiling.sampler.basis.G[tiling.cells[a].type - 1];
        for (const int fi : adjacency[a]) {
            const TilingInterface& face = tiling.interfaces[fi];
            const int b = face.cell_a == a ? face.cell_b : face.cell_a;
            const Mat3& Gb = tiling.sampler.basis.G[tiling.cells[b].type - 1];
            const std::array<double, 3> expected =
                add3(map.offset[a], (Ga - Gb).apply(face.point));
            if (!seen[b]) {
                seen[b] = 1;
                map.offset[b] = expected;
                queue.push(b);
                ++reached;
            } else {
                const double residual = norm3(sub3(map.offset[b], expected));
                map.max_loop_residual = std::max(map.max_loop_residual, residual);
                if (residual > tol) {
                    std::ostringstream msg;
                    msg << "offset propagation fails to close a loop between cells " << a
                        << " and " << b << " (residual = " << residual << ")";
                    throw InconsistentLoop(msg.str());
                }
            }
        }
    }
    if (reached != nc)
        throw ValidationError("tiling interface graph is disconnected");
    return map;
}

MollifiedField mollify_field(const PatternSampler& sampler, double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw ValidationError("mollification width must be positive");
    const double limit = 0.25 * sampler.min_face_separation();
    if (delta > limit) {
        std::ostringstream msg;
        msg << "mollification width " << delta << " exceeds a quarter of the face separation "
            << sampler.min_face_separation();
        throw DeltaTooLarge(msg.str());
    }
    return MollifiedField{sampler, delta};
}

QTensor MollifiedField::sample(const std::array<double, 3>& x) const {
    const PatternSampler::FaceProbe probe = sampler.nearest_jump_face(x);
    const QTensor own = sampler.sample(x);
    if (probe.distance >= delta) return own;

    int target_type = probe.neighbor_type;
    double d = probe.distance;
    if (probe.second_distance < delta && probe.second_neighbor_type < target_type) {
        target_type = probe.second_neighbor_type;
        d = probe.second_distance;
    }
    const Director here = lift_director(own);
    const Director there =
        lift_director(QTensor::retraced(sampler.basis.G[target_type - 1].sym()));
    const double t = 0.5 * (1.0 - d / delta);
    return from_director(slerp_director(here, there, t));
}

WeakConvergenceReport weak_convergence_report(const DiagonalTarget& target,
                                              const std::vector<int>& ns, const Box3& window) {
    if (ns.size() < 2)
        throw ValidationError("slope estimation needs at least two frequencies");
    const LaminateBasis basis = build_laminate_basis(target);
    const Mat3 D = diag_matrix(basis.target);
    const SymTensor3 Dsym =
        SymTensor3::diagonal(basis.target.a, basis.target.b, basis.target.c);

    WeakConvergenceReport report;
    for (const int n : ns) {
        const Tiling tiling = build_tiling(basis, n, window);
        const SymTensor3 avg = average_Qn(tiling, window);
        const PWAffineMap fn = build_fn(tiling);

        std::array<double, 3> lo{}, hi{};
        lo.fill(std::numeric_limits<double>::infinity());
        hi.fill(-std::numeric_limits<double>::infinity());
        for (std::size_t c = 0; c < tiling.cells.size(); ++c) {
            const TilingCell& cell = tiling.cells[c];
            for (const Pt2& v : cell.poly) {
                for (const double x2 : {cell.y0, cell.y1}) {
                    const std::array<double, 3> p{v[0], x2, v[1]};
                    const std::array<double, 3> dev =
                        sub3(fn.evaluate_cell(static_cast<int>(c), p), D.apply(p));
                    for (int k = 0; k < 3; ++k) {
                        lo[k] = std::min(lo[k], dev[k]);
                        hi[k] = std::max(hi[k], dev[k]);
                    }
                }
            }
        }
        double sup = 0.0;
        for (int k = 0; k < 3; ++k) sup = std::max(sup, 0.5 * (hi[k] - lo[k]));

        WeakConvergenceRow row;
        row.n = n;
        row.window_avg_dev = (avg - Dsym).frobenius();
        row.sup_dev = sup;
        report.rows.push_back(row);
    }

    const auto fit_slope = [&](const auto& value_of) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        int count = 0;
        for (const WeakConvergenceRow& row : report.rows) {
            const double v = value_of(row);
            if (v <= 1e-13) continue;
            const double lx = std::log(static_cast<double>(row.n));
            const double ly = std::log(v);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++count;
        }
        if (count < 2) return 0.0;
        const double denom = count * sxx - sx * sx;
        return denom == 0.0 ? 0.0 : (count * sxy - sx * sy) / denom;
    };
    report.avg_slope = fit_slope([](const WeakConvergenceRow& r) { return r.window_avg_dev; });
    report.sup_slope = fit_slope([](const WeakConvergenceRow& r) { return r.sup_dev; });
    return report;
}

}  // namespace nembrane
