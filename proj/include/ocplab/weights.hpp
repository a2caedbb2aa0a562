#pragma once

#include <functional>
#include <span>

#include "ocplab/fem.hpp"
#include "ocplab/mesh.hpp"

namespace ocplab {

// The weight rho = d_z^alpha near a source and 1 away from all sources
// (single-source case: d_z^alpha everywhere). alpha must lie in (n-2, 2).
struct WeightSpec {
  double alpha = 1.0;
  std::vector<Point> sources;
  double d_D = 0.0;
};

WeightSpec make_weight_spec(const SimplicialMesh& mesh, const SourceSet& D,
                            double alpha);

double rho(const Point& x, const WeightSpec& spec);

// Integrate f over a simplex with geometric grading toward z (z must lie in
// the closed simplex): shells scaled by 1/2 toward z, a fixed interior-node
// rule per fragment.
double integrate_graded(int dim, std::span<const Point> simplex, const Point& z,
                        int depth, const QuadRule& rule,
                        const std::function<double(const Point&)>& f);

// || rho^(1/2) (exact_gradient - grad fe) ||_{L^2}; elements whose closure
// touches a source are integrated with the graded composite scheme.
double weighted_grad_error(const FeFunction& fe, const VectorField& exact_gradient,
                           const WeightSpec& spec, int refinement_depth = 12,
                           int quad_degree = 6);

// Diagnostic ratio ||v||_{L^2} / ||grad v||_{L^2(rho)} for v vanishing on the
// boundary.
double weighted_poincare_probe(const FeFunction& fe, const WeightSpec& spec,
                               int refinement_depth = 12, int quad_degree = 6);

}  // namespace ocplab
