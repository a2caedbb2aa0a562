#pragma once

#include <span>
#include <vector>

#include "ocplab/fem.hpp"
#include "ocplab/mesh.hpp"

namespace ocplab {

// Per-element indicators of the combined estimator: squared weighted state
// contributions, max-norm adjoint contributions, and their combination
// E_ocp;T = E_y^2(T) + E_p^2(T).
struct IndicatorField {
  std::vector<double> ey_sq;
  std::vector<double> ep;
  std::vector<double> combined;
  double ey_global = 0.0;
  double ep_global = 0.0;
  double eocp_global = 0.0;
  double log_factor = 0.0;
};

struct StateIndicators {
  std::vector<double> ey_sq;
  double global = 0.0;  // sqrt of the sum
};

struct MaxNormIndicators {
  std::vector<double> value;
  double global = 0.0;  // max over elements
};

// E_y^2(T) = h_T D_T^alpha ||jump||^2_{L^2(dT \ dOmega)}
//          + sum_{z in D, z in closed T} h_T^(alpha+2-n) |u_z|^2.
StateIndicators estimate_state(const FeFunction& y, std::span<const double> u,
                               const SourceSet& D, double alpha,
                               const std::vector<InteriorSide>* sides = nullptr);

// E(T) = h_T^(2-n/2) ||f||_{L^2(T)} + h_T ||jump||_{L^inf(dT \ dOmega)};
// global value is the max over elements.
MaxNormIndicators estimate_poisson_max(const FeFunction& u, const ScalarField& f,
                                       int quad_degree = 6,
                                       const std::vector<InteriorSide>* sides = nullptr);

// The adjoint indicator is the pointwise indicator with f = y - y_d.
MaxNormIndicators estimate_adjoint(const FeFunction& p, const FeFunction& y,
                                   const ScalarField& y_d, int quad_degree = 6,
                                   const std::vector<InteriorSide>* sides = nullptr);

// ( sum_{T in subset} h_T^(2(2-n/2)) || g - P_T g ||^2_{L^2(T)} )^(1/2) with
// P_T the elementwise L^2 projection onto linears.
double oscillation(const ScalarField& g, const SimplicialMesh& mesh,
                   std::span<const int> subset, int quad_degree = 8);

// | log(1 / min_T h_T) |.
double log_factor(const SimplicialMesh& mesh);

IndicatorField combine_indicators(const SimplicialMesh& mesh,
                                  const StateIndicators& state,
                                  const MaxNormIndicators& adjoint);

}  // namespace ocplab
