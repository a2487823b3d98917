#include "nembrane/membrane_fem.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nembrane/errors.hpp"
#include "nembrane/experiment.hpp"

namespace nembrane {

namespace {

constexpr std::array<std::array<int, 2>, 3> kEdges{{{0, 1}, {1, 2}, {2, 0}}};

struct MidpointCache {
    std::vector<std::array<double, 2>> position;  // 3 per triangle
    std::vector<std::array<double, 2>> load;
    std::vector<SymTensor3> warm;
    std::vector<char> has_warm;
};

MidpointCache make_cache(const MembraneProblem& problem) {
    const MembraneMesh& mesh = problem.mesh;
    MidpointCache cache;
    const std::size_t count = 3 * mesh.tris.size();
    cache.position.resize(count);
    cache.load.assign(count, {0.0, 0.0});
    cache.warm.assign(count, SymTensor3::zero());
    cache.has_warm.assign(count, 0);
    for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
        const MembraneMesh::Tri& tri = mesh.tris[t];
        for (int e = 0; e < 3; ++e) {
            const std::array<double, 2>& pa = mesh.nodes[tri.v[kEdges[e][0]]];
            const std::array<double, 2>& pb = mesh.nodes[tri.v[kEdges[e][1]]];
            const std::array<double, 2> mid{0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])};
            cache.position[3 * t + e] = mid;
            if (problem.load) cache.load[3 * t + e] = problem.load(mid[0], mid[1]);
        }
    }
    return cache;
}

// Energy and (optionally) gradient in one sweep; the cache carries the
// midpoint loads and the previous foundation minimizers.
double evaluate(const MembraneProblem& problem, const std::vector<double>& dof,
                std::vector<double>* grad, MidpointCache& cache) {
    const MembraneMesh& mesh = problem.mesh;
    const MaterialParams& mat = problem.material;
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);

    double energy = 0.0;
    for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
        const MembraneMesh::Tri& tri = mesh.tris[t];
        const double area = tri.area;

        const SymTensor2 e = triangle_strain(tri, dof);
        energy += 0.5 * area * film_density(e, mat);
        if (grad) {
            const double w33 = mat.w33();
            const double tr = e.trace();
            const double s11 = w33 * tr + e.e11;
            const double s22 = w33 * tr + e.e22;
            const double s12 = e.e12;
            for (int k = 0; k < 3; ++k) {
                const auto& g = tri.grad[k];
                (*grad)[2 * tri.v[k] + 0] += area * (s11 * g[0] + s12 * g[1]);
                (*grad)[2 * tri.v[k] + 1] += area * (s12 * g[0] + s22 * g[1]);
            }
        }

        for (int eidx = 0; eidx < 3; ++eidx) {
            const int na = tri.v[kEdges[eidx][0]];
            const int nb = tri.v[kEdges[eidx][1]];
            const std::array<double, 2> um{0.5 * (dof[2 * na] + dof[2 * nb]),
                                           0.5 * (dof[2 * na + 1] + dof[2 * nb + 1])};
            const std::size_t slot = 3 * t + eidx;

            if (problem.with_foundation) {
                const SymTensor3* warm = cache.has_warm[slot] ? &cache.warm[slot] : nullptr;
                const FoundationEval fe = evaluate_foundation(um, mat, kOptimalityTol, warm);
                cache.warm[slot] = fe.qbar.t;
                cache.has_warm[slot] = 1;
                energy += area / 6.0 * fe.density;
                if (grad) {
                    for (const int n : {na, nb}) {
                        (*grad)[2 * n + 0] += area / 12.0 * fe.grad[0];
                        (*grad)[2 * n + 1] += area / 12.0 * fe.grad[1];
                    }
                }
            }

            const std::array<double, 2>& f = cache.load[slot];
            energy -= area / 3.0 * (f[0] * um[0] + f[1] * um[1]);
            if (grad) {
                for (const int n : {na, nb}) {
                    (*grad)[2 * n + 0] -= area / 6.0 * f[0];
                    (*grad)[2 * n + 1] -= area / 6.0 * f[1];
                }
            }
        }
    }
    return energy;
}

}  // namespace

MembraneMesh make_membrane_mesh(double lx, double ly, int nx, int ny) {
    if (!(lx > 0.0) || !(ly > 0.0)) throw ValidationError("mesh extents must be positive");
    if (nx < 1 || ny < 1) throw ValidationError("mesh must have at least one quad per side");

    MembraneMesh mesh;
    mesh.lx = lx;
    mesh.ly = ly;
    mesh.nx = nx;
    mesh.ny = ny;
    mesh.nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    const double hx = lx / nx;
    const double hy = ly / ny;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) mesh.nodes.push_back({i * hx, j * hy});

    const auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    mesh.tris.reserve(static_cast<std::size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int n00 = id(i, j), n10 = id(i + 1, j);
            const int n01 = id(i, j + 1), n11 = id(i + 1, j + 1);
            for (const std::array<int, 3>& verts :
                 {std::array<int, 3>{n00, n10, n11}, std::array<int, 3>{n00, n11, n01}}) {
                MembraneMesh::Tri tri;
                tri.v = verts;
                const auto& p0 = mesh.nodes[verts[0]];
                const auto& p1 = mesh.nodes[verts[1]];
                const auto& p2 = mesh.nodes[verts[2]];
                const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                                   (p2[0] - p0[0]) * (p1[1] - p0[1]);
                tri.area = 0.5 * det;
                tri.grad[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
                tri.grad[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
                tri.grad[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
                mesh.tris.push_back(tri);
            }
        }
    }
    return mesh;
}

bool node_clamped(const MembraneProblem& problem, int node) {
    const int i = node % (problem.mesh.nx + 1);
    const int j = node / (problem.mesh.nx + 1);
    return (problem.clamped[0] && i == 0) || (problem.clamped[1] && i == problem.mesh.nx) ||
           (problem.clamped[2] && j == 0) || (problem.clamped[3] && j == problem.mesh.ny);
}

SymTensor2 triangle_strain(const MembraneMesh::Tri& tri, const std::vector<double>& dof) {
    SymTensor2 e;
    for (int k = 0; k < 3; ++k) {
        const double ux = dof[2 * tri.v[k] + 0];
        const double uy = dof[2 * tri.v[k] + 1];
        const auto& g = tri.grad[k];
        e.e11 += ux * g[0];
        e.e22 += uy * g[1];
        e.e12 += 0.5 * (ux * g[1] + uy * g[0]);
    }
    return e;
}

double membrane_energy(const MembraneProblem& problem, const std::vector<double>& dof) {
    if (dof.size() != static_cast<std::size_t>(2 * problem.mesh.node_count()))
        throw MeshMismatch("dof vector size does not match the mesh");
    MidpointCache cache = make_cache(problem);
    return evaluate(problem, dof, nullptr, cache);
}

std::vector<double> membrane_gradient(const MembraneProblem& problem,
                                      const std::vector<double>& dof) {
    if (dof.size() != static_cast<std::size_t>(2 * problem.mesh.node_count()))
        throw MeshMismatch("dof vector size does not match the mesh");
    MidpointCache cache = make_cache(problem);
    std::vector<double> grad(dof.size(), 0.0);
    evaluate(problem, dof, &grad, cache);
    return grad;
}

MembraneSolveReport solve_membrane(const MembraneProblem& problem, double tol, int max_iter) {
    const MembraneMesh& mesh = problem.mesh;
    if (!problem.clamped[0] && !problem.clamped[1] && !problem.clamped[2] &&
        !problem.clamped[3])
        throw SingularSystem("membrane rigid motions are unconstrained: clamp at least one side");

    const int nn = mesh.node_count();
    const std::size_t ndof = static_cast<std::size_t>(2 * nn);
    std::vector<char> fixed(ndof, 0);
    std::vector<double> pinned(ndof, 0.0);
    int free_count = 0;
    for (int n = 0; n < nn; ++n) {
        if (node_clamped(problem, n)) {
            fixed[2 * n] = fixed[2 * n + 1] = 1;
            if (problem.boundary) {
                const auto g = problem.boundary(mesh.nodes[n][0], mesh.nodes[n][1]);
                pinned[2 * n] = g[0];
                pinned[2 * n + 1] = g[1];
            }
        } else {
            free_count += 2;
        }
    }

    MidpointCache cache = make_cache(problem);
    MembraneSolveReport report;
    report.dof = pinned;

    if (free_count == 0) {
        report.energy = evaluate(problem, report.dof, nullptr, cache);
        return report;
    }

    // Film stiffness bound by power iteration on the free subspace; the
    // film gradient is linear in the dofs, so it doubles as the operator.
    MembraneProblem film_only = problem;
    film_only.with_foundation = false;
    film_only.load = nullptr;
    MidpointCache film_cache = make_cache(film_only);
    std::vector<double> v(ndof, 0.0), kv(ndof, 0.0);
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t d = 0; d < ndof; ++d)
        if (!fixed[d]) v[d] = unit(rng);
    double l_film = 0.0;
    for (int it = 0; it < 40; ++it) {
        evaluate(film_only, v, &kv, film_cache);
        double norm = 0.0;
        for (std::size_t d = 0; d < ndof; ++d) {
            if (fixed[d]) kv[d] = 0.0;
            norm += kv[d] * kv[d];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        l_film = norm;
        for (std::size_t d = 0; d < ndof; ++d) v[d] = kv[d] / norm;
    }

    double l_foundation = 0.0;
    if (problem.with_foundation) {
        std::vector<double> lump(static_cast<std::size_t>(nn), 0.0);
        for (const MembraneMesh::Tri& tri : mesh.tris)
            for (const int n : tri.v) lump[n] += tri.area / 4.0;
        l_foundation = *std::max_element(lump.begin(), lump.end());
    }

    const double L = 1.2 * l_film + l_foundation;
    const double step = 1.0 / L;

    std::vector<double> u = report.dof;
    std::vector<double> u_prev = u;
    std::vector<double> y = u;
    std::vector<double> grad(ndof, 0.0);
    double t = 1.0;
    double energy_prev = evaluate(problem, u, nullptr, cache);

    for (int it = 1; it <= max_iter; ++it) {
        evaluate(problem, y, &grad, cache);
        std::vector<double> u_next = y;
        for (std::size_t d = 0; d < ndof; ++d)
            if (!fixed[d]) u_next[d] -= step * grad[d];

        const double energy_next = evaluate(problem, u_next, &grad, cache);
        if (energy_next > energy_prev + 1e-14 * (1.0 + std::abs(energy_prev))) {
            // Momentum overshoot: drop back to the last iterate.
            ++report.restarts;
            t = 1.0;
            y = u;
            report.iterations = it;
            continue;
        }

        double gmax = 0.0;
        for (std::size_t d = 0; d < ndof; ++d)
            if (!fixed[d]) gmax = std::max(gmax, std::abs(grad[d]));

        u_prev = u;
        u = u_next;
        energy_prev = energy_next;
        report.iterations = it;

        if (gmax <= tol) {
            report.dof = u;
            report.energy = energy_next;
            report.grad_norm = gmax;
            return report;
        }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        for (std::size_t d = 0; d < ndof; ++d)
            y[d] = u[d] + beta * (u[d] - u_prev[d]);
        t = t_next;
    }
    throw NoConvergence("membrane solve: gradient stayed above tol after " +
                        std::to_string(max_iter) + " iterations");
}

void export_solution(const MembraneProblem& problem, const std::vector<double>& dof,
                     const std::string& path) {
    const MembraneMesh& mesh = problem.mesh;
    if (dof.size() != 2 * static_cast<std::size_t>(mesh.node_count())) {
        throw MeshMismatch("export_solution: dof vector does not match the mesh");
    }
    std::vector<double> film(static_cast<std::size_t>(mesh.node_count()), 0.0);
    std::vector<double> weight(static_cast<std::size_t>(mesh.node_count()), 0.0);
    for (const auto& tri : mesh.tris) {
        const double d = film_density(triangle_strain(tri, dof), problem.material);
        for (int v : tri.v) {
            film[static_cast<std::size_t>(v)] += tri.area * d;
            weight[static_cast<std::size_t>(v)] += tri.area;
        }
    }
    CsvWriter csv(path, {"x", "y", "u1", "u2", "foundation_density", "film_density"});
    for (int node = 0; node < mesh.node_count(); ++node) {
        const std::size_t k = static_cast<std::size_t>(node);
        const std::array<double, 2> u = {dof[2 * k], dof[2 * k + 1]};
        const double found =
            problem.with_foundation ? foundation_density(u, problem.material) : 0.0;
        csv.row({mesh.nodes[k][0], mesh.nodes[k][1], u[0], u[1], found,
                 film[k] / weight[k]});
    }
    csv.close();
}

}  // namespace nembrane
