#pragma once

#include <array>
#include <functional>
#include <vector>

#include "nembrane/effective_model.hpp"
#include "nembrane/sym3.hpp"

namespace nembrane {

// Structured P1 mesh of the rectangle (0,lx) x (0,ly): nx-by-ny quads, each
// split along the (n00, n11) diagonal.  Node (i,j) has index j*(nx+1)+i.
struct MembraneMesh {
    double lx = 1.0, ly = 1.0;
    int nx = 1, ny = 1;

    struct Tri {
        std::array<int, 3> v{};
        double area = 0.0;
        std::array<std::array<double, 2>, 3> grad{};  // shape-function gradients
    };

    std::vector<std::array<double, 2>> nodes;
    std::vector<Tri> tris;

    int node_count() const { return static_cast<int>(nodes.size()); }
};

MembraneMesh make_membrane_mesh(double lx, double ly, int nx, int ny);

using PlaneField = std::function<std::array<double, 2>(double, double)>;

// Energy (1/2)∫ film_density(e(u)) + foundation_density(u) dx - ∫ f.u dx
// over nodal displacements, with clamped sides pinned to the boundary
// field (zero when none is given).  Side order: left, right, bottom, top.
struct MembraneProblem {
    MembraneMesh mesh;
    MaterialParams material{};
    bool with_foundation = true;
    std::array<bool, 4> clamped{true, true, true, true};
    PlaneField load;      // empty means zero load
    PlaneField boundary;  // empty means homogeneous clamping
};

// True when the node lies on a clamped side.
bool node_clamped(const MembraneProblem& problem, int node);

// Constant strain of one triangle from the nodal vector (2 dofs per node).
SymTensor2 triangle_strain(const MembraneMesh::Tri& tri, const std::vector<double>& dof);

// Total energy of a nodal vector; edge-midpoint quadrature for the
// foundation and load terms.
double membrane_energy(const MembraneProblem& problem, const std::vector<double>& dof);

// Gradient of membrane_energy with respect to every dof (clamping is the
// solver's concern, so boundary entries are genuine partial derivatives).
std::vector<double> membrane_gradient(const MembraneProblem& problem,
                                      const std::vector<double>& dof);

struct MembraneSolveReport {
    std::vector<double> dof;
    double energy = 0.0;
    double grad_norm = 0.0;  // max |dE/du| over free dofs
    int iterations = 0;
    int restarts = 0;
};

// Accelerated gradient descent with function-value restarts; the step uses
// a power-iteration bound for the film stiffness plus a lumped bound for
// the foundation curvature.  Throws SingularSystem when no side is clamped
// and NoConvergence when the gradient fails to reach tol in max_iter.
MembraneSolveReport solve_membrane(const MembraneProblem& problem, double tol = 1e-7,
                                   int max_iter = 200000);

// CSV per node: x, y, u1, u2, foundation_density, film_density.  The film
// density (constant per triangle) is area-averaged over the incident
// triangles.
void export_solution(const MembraneProblem& problem, const std::vector<double>& dof,
                     const std::string& path);

}  // namespace nembrane
