#pragma once

#include <optional>
#include <string>

#include "ocplab/ocp_solver.hpp"
#include "ocplab/weights.hpp"

namespace ocplab {

// Closed-form optimal triple built from fundamental solutions: the control
// satisfies the projection formula by construction and the desired state is
// chosen so the adjoint equation holds exactly.
struct ManufacturedCase {
  ScalarField exact_state;
  VectorField exact_state_grad;
  ScalarField exact_adjoint;
  ScalarField adjoint_laplacian;
  std::vector<double> exact_control;
  ScalarField desired_state;
  ScalarField state_boundary_data;
  ScalarField adjoint_boundary_data;
};

// Fundamental-solution combination sum_z rho_z Phi(x - z) and its gradient.
std::pair<ScalarField, VectorField> fundamental_state(const SourceSet& D,
                                                      std::vector<double> weights,
                                                      int dim);

ManufacturedCase build_case(const ScalarField& adjoint,
                            const ScalarField& adjoint_laplacian,
                            std::vector<double> lower, std::vector<double> upper,
                            double lambda, const SourceSet& D, double alpha,
                            int dim);

// One of the six experiment configurations; lambda/alpha act as run
// parameters where the experiment series varies them.
struct ExperimentPreset {
  std::string name;
  std::string domain;
  int dim = 2;
  OcpProblem problem;
  std::optional<ManufacturedCase> exact;
};

ExperimentPreset preset(const std::string& name,
                        std::optional<double> lambda = std::nullopt,
                        std::optional<double> alpha = std::nullopt);

// Canonical seed: structured initial mesh plus uniform pre-refinements; the
// adaptive driver separates the sources afterwards.
SimplicialMesh make_seed_mesh(const ExperimentPreset& ep, int pre_refinements = 2);

struct ExactErrors {
  double err_y = 0.0;
  double err_p = 0.0;
  double err_u = 0.0;
  double err_total = 0.0;
};

ExactErrors exact_errors(const OcpSolution& solution, const ManufacturedCase& mc,
                         const WeightSpec& spec, int graded_depth = 12,
                         int quad_degree = 6);

}  // namespace ocplab
