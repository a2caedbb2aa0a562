#include "ocplab/weights.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ocplab {

WeightSpec make_weight_spec(const SimplicialMesh& mesh, const SourceSet& D,
                            double alpha) {
  if (!(alpha > mesh.dim - 2.0 && alpha < 2.0))
    throw std::invalid_argument("make_weight_spec: alpha outside (n-2, 2)");
  WeightSpec spec;
  spec.alpha = alpha;
  spec.sources = D.points;
  spec.d_D = source_distance_dD(mesh, D);
  return spec;
}

double rho(const Point& x, const WeightSpec& spec) {
  double dmin = std::numeric_limits<double>::max();
  for (const Point& z : spec.sources) dmin = std::min(dmin, distance(x, z));
  if (spec.sources.size() == 1) return std::pow(dmin, spec.alpha);
  // Multi-source branch: d_z^alpha strictly inside the d_D/2 ball, 1 outside.
  if (dmin < 0.5 * spec.d_D) return std::pow(dmin, spec.alpha);
  return 1.0;
}

namespace {

double apply_rule(int dim, std::span<const Point> verts, const QuadRule& rule,
                  const std::function<double(const Point&)>& f) {
  const double vol = simplex_volume(dim, verts);
  double s = 0.0;
  for (size_t q = 0; q < rule.weights.size(); ++q)
    s += rule.weights[q] * f(rule.map(verts, q));
  return vol * s;
}

}  // namespace

double integrate_graded(int dim, std::span<const Point> simplex, const Point& z,
                        int depth, const QuadRule& rule,
                        const std::function<double(const Point&)>& f) {
  const double vol_T = simplex_volume(dim, simplex);
  double total = 0.0;
  std::array<Point, 4> frag;
  std::array<Point, 3> outer, inner;

  double s_out = 1.0;
  for (int k = 0; k < depth; ++k) {
    const double s_in = 0.5 * s_out;
    // One frustum per facet whose cone from z is non-degenerate.
    for (int skip = 0; skip <= dim; ++skip) {
      int m = 0;
      for (int i = 0; i <= dim; ++i)
        if (i != skip) {
          outer[m] = z + s_out * (simplex[i] - z);
          inner[m] = z + s_in * (simplex[i] - z);
          ++m;
        }
      // Cone volume test (degenerate when z lies in the facet plane).
      frag[0] = z;
      for (int i = 0; i < dim; ++i) frag[i + 1] = outer[i];
      if (simplex_volume(dim, std::span<const Point>(frag.data(), dim + 1)) <
          1e-14 * vol_T)
        continue;
      // Staircase triangulation of the frustum between the two facets.
      for (int t = 0; t < dim; ++t) {
        int m2 = 0;
        for (int i = 0; i <= dim - 1 - t; ++i) frag[m2++] = outer[i];
        for (int i = dim - 1 - t; i <= dim - 1; ++i) frag[m2++] = inner[i];
        const std::span<const Point> fs(frag.data(), dim + 1);
        if (simplex_volume(dim, fs) < 1e-16 * vol_T) continue;
        total += apply_rule(dim, fs, rule, f);
      }
    }
    s_out = s_in;
  }
  // Innermost core, a scaled copy of the simplex around z.
  for (int i = 0; i <= dim; ++i) frag[i] = z + s_out * (simplex[i] - z);
  total += apply_rule(dim, std::span<const Point>(frag.data(), dim + 1), rule, f);
  return total;
}

double weighted_grad_error(const FeFunction& fe, const VectorField& exact_gradient,
                           const WeightSpec& spec, int refinement_depth,
                           int quad_degree) {
  const SimplicialMesh& mesh = *fe.space->mesh;
  const QuadRule& rule = simplex_rule(mesh.dim, quad_degree);
  double total = 0.0;
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const Point gT = fe.gradient(t);
    const auto integrand = [&](const Point& x) {
      const Point d = exact_gradient(x) - gT;
      return rho(x, spec) * dot(d, d);
    };
    const auto ev = mesh.element_vertices(t);
    const std::span<const Point> vs(ev.data(), mesh.dim + 1);
    const Point* source = nullptr;
    for (const Point& z : spec.sources) {
      if (mesh.element_contains(t, z)) {
        source = &z;
        break;
      }
    }
    if (source)
      total += integrate_graded(mesh.dim, vs, *source, refinement_depth, rule, integrand);
    else
      total += apply_rule(mesh.dim, vs, rule, integrand);
  }
  return std::sqrt(total);
}

double weighted_poincare_probe(const FeFunction& fe, const WeightSpec& spec,
                               int refinement_depth, int quad_degree) {
  const SimplicialMesh& mesh = *fe.space->mesh;
  // ||v||_{L^2}^2 exactly from the P1 mass formula per element.
  double num2 = 0.0;
  const int d = mesh.dim;
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const auto& e = mesh.elements[t];
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i <= d; ++i) {
      const double c = fe.coeff[e.v[i]];
      sum += c;
      sumsq += c * c;
    }
    num2 += mesh.element_volume(t) / ((d + 1.0) * (d + 2.0)) * (sum * sum + sumsq);
  }
  const VectorField zero = [](const Point&) { return Point{0.0, 0.0, 0.0}; };
  const double den = weighted_grad_error(fe, zero, spec, refinement_depth, quad_degree);
  if (den == 0.0)
    throw std::invalid_argument("weighted_poincare_probe: zero gradient norm");
  return std::sqrt(num2) / den;
}

}  // namespace ocplab
