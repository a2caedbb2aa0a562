#pragma once

#include <optional>
#include <vector>

#include "ocplab/fem.hpp"
#include "ocplab/mesh.hpp"

namespace ocplab {

// Problem data: sources with box bounds, Tikhonov parameter, desired state,
// and optional inhomogeneous Dirichlet data for the state and adjoint solves
// (both zero in the theory-conforming case).
struct OcpProblem {
  SourceSet sources;
  std::vector<double> lower;
  std::vector<double> upper;
  double lambda = 1.0;
  ScalarField desired_state;
  ScalarField state_boundary_data;    // may be null (homogeneous)
  ScalarField adjoint_boundary_data;  // may be null (homogeneous)
  double weight_alpha = 1.0;

  void validate(int dim) const;
};

struct OcpSolution {
  FeFunction y;
  FeFunction p;
  std::vector<double> u;
  std::vector<int> active_lower;
  std::vector<int> active_upper;
  int iterations = 0;
  double max_rel_residual = 0.0;  // worst linear-solve relative residual
};

// The control-to-adjoint-values map restricted to R^l: values(u) = offset + G u
// with G the (SPD) Gram matrix of the discrete state responses. Keeps the
// solved responses so the full state/adjoint can be assembled for any u.
struct ReducedOperator {
  std::vector<std::vector<double>> G;  // column-major: G[j][k] = p_j(z_k)
  std::vector<double> offset;          // p_0(z_k)
  std::vector<std::vector<double>> y_unit, p_unit;
  std::vector<double> y_affine, p_affine;
  double max_rel_residual = 0.0;
};

struct SolverOptions {
  int quad_degree = 0;  // 0: dimension default (10 in 2D, 8 in 3D)
  double cg_tol = 1e-12;
  double active_set_tol = 1e-10;
  int max_active_set_iter = 50;
};

// Warm-start data prolongated from a previous mesh (same problem).
struct ReducedWarmStart {
  std::vector<std::vector<double>> y_unit, p_unit;
  std::vector<double> y_affine, p_affine;
};

int default_quad_degree(int dim);

ReducedOperator reduced_operator(const P1Space& space, const OcpProblem& problem,
                                 const SolverOptions& opts = {},
                                 const ReducedWarmStart* warm = nullptr);

OcpSolution solve_active_set(const OcpProblem& problem, const P1Space& space,
                             const SolverOptions& opts = {},
                             const std::vector<double>* warm_u = nullptr,
                             const ReducedWarmStart* warm = nullptr,
                             ReducedOperator* op_out = nullptr);

// max_z | u_z - clamp(-p(z)/lambda) |, evaluated from the solution fields.
double vi_residual(const OcpSolution& solution, const OcpProblem& problem);

// J(y, u) = 1/2 || y - y_d ||^2 + lambda/2 |u|^2.
double evaluate_cost(const OcpSolution& solution, const OcpProblem& problem,
                     int quad_degree = 0);

class ActiveSetFailure : public std::runtime_error {
 public:
  ActiveSetFailure(const std::string& what, double residual)
      : std::runtime_error(what), last_residual(residual) {}
  double last_residual;
};

}  // namespace ocplab
