#include "ocplab/estimators.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "ocplab/quadrature.hpp"

namespace ocplab {

namespace {

// jump values and element -> side adjacency, computed once per call.
struct SideData {
  std::vector<InteriorSide> own;
  const std::vector<InteriorSide>* sides;
  std::vector<std::vector<int>> of_element;

  SideData(const SimplicialMesh& mesh, const std::vector<InteriorSide>* precomputed) {
    if (precomputed) {
      sides = precomputed;
    } else {
      own = interior_sides(mesh);
      sides = &own;
    }
    of_element.resize(mesh.n_elements());
    for (size_t s = 0; s < sides->size(); ++s) {
      of_element[(*sides)[s].t_plus].push_back(static_cast<int>(s));
      of_element[(*sides)[s].t_minus].push_back(static_cast<int>(s));
    }
  }
};

}  // namespace

StateIndicators estimate_state(const FeFunction& y, std::span<const double> u,
                               const SourceSet& D, double alpha,
                               const std::vector<InteriorSide>* sides) {
  const SimplicialMesh& mesh = *y.space->mesh;
  if (!(alpha > mesh.dim - 2.0 && alpha < 2.0))
    throw std::invalid_argument("estimate_state: alpha outside (n-2, 2)");
  if (static_cast<int>(u.size()) != D.size())
    throw std::invalid_argument("estimate_state: control size mismatch");

  const SideData sd(mesh, sides);
  std::vector<double> jump_sq(sd.sides->size(), 0.0);
  for (size_t s = 0; s < sd.sides->size(); ++s) {
    const double j = gradient_jump(y, (*sd.sides)[s]);
    jump_sq[s] = j * j * (*sd.sides)[s].measure;
  }

  StateIndicators out;
  out.ey_sq.assign(mesh.n_elements(), 0.0);
  double total = 0.0;
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const double hT = mesh.element_diameter(t);
    double value = 0.0;
    if (!sd.of_element[t].empty()) {
      double jsum = 0.0;
      for (int s : sd.of_element[t]) jsum += jump_sq[s];
      value += hT * std::pow(element_DT(mesh, t, D), alpha) * jsum;
    }
    for (int k = 0; k < D.size(); ++k)
      if (mesh.element_contains(t, D.points[k]))
        value += std::pow(hT, alpha + 2.0 - mesh.dim) * u[k] * u[k];
    out.ey_sq[t] = value;
    total += value;
  }
  out.global = std::sqrt(total);
  return out;
}

namespace {

MaxNormIndicators pointwise_indicator(
    const FeFunction& uh, const std::function<double(int, const Point&)>& f,
    int quad_degree, const std::vector<InteriorSide>* sides) {
  const SimplicialMesh& mesh = *uh.space->mesh;
  const QuadRule& rule = simplex_rule(mesh.dim, quad_degree);
  const SideData sd(mesh, sides);
  std::vector<double> jump_abs(sd.sides->size(), 0.0);
  for (size_t s = 0; s < sd.sides->size(); ++s)
    jump_abs[s] = std::abs(gradient_jump(uh, (*sd.sides)[s]));

  MaxNormIndicators out;
  out.value.assign(mesh.n_elements(), 0.0);
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const auto ev = mesh.element_vertices(t);
    const std::span<const Point> vs(ev.data(), mesh.dim + 1);
    const double vol = simplex_volume(mesh.dim, vs);
    const double hT = mesh.element_diameter(t);
    double f_l2_sq = 0.0;
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      const double fq = f(t, rule.map(vs, q));
      f_l2_sq += vol * rule.weights[q] * fq * fq;
    }
    double jmax = 0.0;
    for (int s : sd.of_element[t]) jmax = std::max(jmax, jump_abs[s]);
    out.value[t] = std::pow(hT, 2.0 - 0.5 * mesh.dim) * std::sqrt(f_l2_sq) + hT * jmax;
    out.global = std::max(out.global, out.value[t]);
  }
  return out;
}

}  // namespace

MaxNormIndicators estimate_poisson_max(const FeFunction& u, const ScalarField& f,
                                       int quad_degree,
                                       const std::vector<InteriorSide>* sides) {
  return pointwise_indicator(
      u, [&f](int, const Point& x) { return f(x); }, quad_degree, sides);
}

MaxNormIndicators estimate_adjoint(const FeFunction& p, const FeFunction& y,
                                   const ScalarField& y_d, int quad_degree,
                                   const std::vector<InteriorSide>* sides) {
  return pointwise_indicator(
      p,
      [&y, &y_d](int t, const Point& x) { return y.evaluate_in(t, x) - y_d(x); },
      quad_degree, sides);
}

double oscillation(const ScalarField& g, const SimplicialMesh& mesh,
                   std::span<const int> subset, int quad_degree) {
  const QuadRule& rule = simplex_rule(mesh.dim, quad_degree);
  const int d = mesh.dim;
  double total = 0.0;
  Eigen::MatrixXd Mloc(d + 1, d + 1);
  Eigen::VectorXd b(d + 1);
  for (int t : subset) {
    const auto ev = mesh.element_vertices(t);
    const std::span<const Point> vs(ev.data(), d + 1);
    const double vol = simplex_volume(d, vs);
    const double hT = mesh.element_diameter(t);
    // Local mass matrix of the barycentric basis and moments of g.
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j)
        Mloc(i, j) = vol / ((d + 1.0) * (d + 2.0)) * (i == j ? 2.0 : 1.0);
    b.setZero();
    std::vector<double> gq(rule.weights.size());
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      gq[q] = g(rule.map(vs, q));
      const double w = vol * rule.weights[q];
      for (int i = 0; i <= d; ++i) b(i) += w * gq[q] * rule.bary[q][i];
    }
    const Eigen::VectorXd coef = Mloc.ldlt().solve(b);
    // Pointwise remainder at the nodes avoids cancellation in || g - Pg ||^2.
    double local = 0.0;
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      double lin = 0.0;
      for (int i = 0; i <= d; ++i) lin += coef(i) * rule.bary[q][i];
      const double r = gq[q] - lin;
      local += vol * rule.weights[q] * r * r;
    }
    total += std::pow(hT, 2.0 * (2.0 - 0.5 * d)) * local;
  }
  return std::sqrt(total);
}

double log_factor(const SimplicialMesh& mesh) {
  if (mesh.n_elements() == 0) throw std::invalid_argument("log_factor: empty mesh");
  return std::abs(std::log(1.0 / mesh.min_diameter()));
}

IndicatorField combine_indicators(const SimplicialMesh& mesh,
                                  const StateIndicators& state,
                                  const MaxNormIndicators& adjoint) {
  IndicatorField out;
  out.ey_sq = state.ey_sq;
  out.ep = adjoint.value;
  out.combined.assign(mesh.n_elements(), 0.0);
  for (int t = 0; t < mesh.n_elements(); ++t)
    out.combined[t] = state.ey_sq[t] + adjoint.value[t] * adjoint.value[t];
  out.ey_global = state.global;
  out.ep_global = adjoint.global;
  out.eocp_global = std::sqrt(state.global * state.global +
                              adjoint.global * adjoint.global);
  out.log_factor = log_factor(mesh);
  return out;
}

}  // namespace ocplab
