#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ocplab/mesh.hpp"
#include "ocplab/quadrature.hpp"

namespace ocplab {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

// Continuous piecewise-linear space on a mesh; one dof per vertex, Dirichlet
// dofs are exactly the boundary vertices.
struct P1Space {
  const SimplicialMesh* mesh = nullptr;
  std::vector<char> is_dirichlet;  // per dof
  int n_dofs = 0;
  int n_free = 0;

  int dim() const { return mesh->dim; }
};

P1Space make_p1_space(const SimplicialMesh& mesh);

// Compressed sparse row storage; assembled matrices are symmetric and SPD on
// the free dofs.
struct SparseSpdMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<double> vals;

  void multiply(std::span<const double> x, std::span<double> y) const;
  double& coeff_ref(int i, int j);
  double coeff(int i, int j) const;
};

struct FeFunction {
  const P1Space* space = nullptr;
  std::vector<double> coeff;

  // Barycentric interpolation at a point inside element t.
  double evaluate_in(int t, const Point& x) const;
  // Constant gradient on element t.
  Point gradient(int t) const;
};

SparseSpdMatrix assemble_stiffness(const P1Space& space);
SparseSpdMatrix assemble_mass(const P1Space& space);

// Load vector entries phi_i(z) scaled by the control values.
std::vector<double> assemble_point_source_load(const P1Space& space,
                                               const SourceSet& D,
                                               std::span<const double> u);

std::vector<double> assemble_l2_load(const P1Space& space, const ScalarField& g,
                                     int quad_degree);

// Reduce to the free dofs: subtract the stiffness columns times the boundary
// values from the free rows and pin rhs to the prescribed values on the
// Dirichlet rows. boundary_values may be empty (all zero).
void apply_dirichlet(const SparseSpdMatrix& A, std::vector<double>& rhs,
                     const P1Space& space,
                     std::span<const double> boundary_values);

struct SolveInfo {
  int iterations = 0;
  double rel_residual = 0.0;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double residual)
      : std::runtime_error(what), final_residual(residual) {}
  double final_residual;
};

// Diagonally preconditioned CG on the free dofs; rhs carries the prescribed
// values on Dirichlet rows (see apply_dirichlet). Optional initial guess x0.
SolveInfo solve_spd(const SparseSpdMatrix& A, std::span<const double> rhs,
                    const P1Space& space, std::vector<double>& x,
                    double rel_tol = 1e-12, int max_iter = -1,
                    const std::vector<double>* x0 = nullptr);

// Point evaluation (lowest-index containing element) and per-element gradient.
double evaluate(const FeFunction& f, const Point& x);
Point evaluate_gradient(const FeFunction& f, int t);

// Scalar normal jump across an interior side, constant for P1.
double gradient_jump(const FeFunction& f, const InteriorSide& side);

// Interpolate a coarse coefficient vector onto a refinement of its mesh
// (bisection midpoints average their parents).
std::vector<double> prolongate(const SimplicialMesh& fine,
                               std::span<const double> coarse);

}  // namespace ocplab
