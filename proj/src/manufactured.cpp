#include "ocplab/manufactured.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ocplab {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp_control(double a, double b, double v) {
  return std::max(a, std::min(b, v));
}

// Angle in [0, 3pi/2] measured counterclockwise from the positive x-axis, so
// the re-entrant corner of the 2D L-shape is interior to the sector.
double lshape_angle(const Point& x) {
  const double th = std::atan2(x[1], x[0]);
  return th < 0.0 ? th + 2.0 * kPi : th;
}

}  // namespace

std::pair<ScalarField, VectorField> fundamental_state(const SourceSet& D,
                                                      std::vector<double> weights,
                                                      int dim) {
  if (static_cast<int>(weights.size()) != D.size())
    throw std::invalid_argument("fundamental_state: weight size mismatch");
  const auto points = D.points;
  ScalarField value = [points, weights, dim](const Point& x) {
    double s = 0.0;
    for (size_t k = 0; k < points.size(); ++k) {
      const double r = distance(x, points[k]);
      if (r == 0.0)
        throw std::domain_error("fundamental_state: evaluation at a source point");
      s += dim == 2 ? -weights[k] / (2.0 * kPi) * std::log(r)
                    : weights[k] / (4.0 * kPi) / r;
    }
    return s;
  };
  VectorField grad = [points, weights, dim](const Point& x) {
    Point g{0.0, 0.0, 0.0};
    for (size_t k = 0; k < points.size(); ++k) {
      const Point d = x - points[k];
      const double r2 = dot(d, d);
      if (r2 == 0.0)
        throw std::domain_error("fundamental_state: evaluation at a source point");
      const double factor = dim == 2 ? -weights[k] / (2.0 * kPi) / r2
                                     : -weights[k] / (4.0 * kPi) / (r2 * std::sqrt(r2));
      g = g + factor * d;
    }
    return g;
  };
  return {value, grad};
}

ManufacturedCase build_case(const ScalarField& adjoint,
                            const ScalarField& adjoint_laplacian,
                            std::vector<double> lower, std::vector<double> upper,
                            double lambda, const SourceSet& D, double alpha,
                            int dim) {
  (void)alpha;
  ManufacturedCase mc;
  mc.exact_adjoint = adjoint;
  mc.adjoint_laplacian = adjoint_laplacian;
  const int l = D.size();
  mc.exact_control.resize(l);
  for (int k = 0; k < l; ++k)
    mc.exact_control[k] =
        clamp_control(lower[k], upper[k], -adjoint(D.points[k]) / lambda);
  auto [state, grad] = fundamental_state(D, mc.exact_control, dim);
  mc.exact_state = state;
  mc.exact_state_grad = grad;
  // Adjoint equation -lap p = y - y_d, hence y_d = y + lap p.
  mc.desired_state = [state, adjoint_laplacian](const Point& x) {
    return state(x) + adjoint_laplacian(x);
  };
  mc.state_boundary_data = state;
  mc.adjoint_boundary_data = adjoint;
  return mc;
}

ExperimentPreset preset(const std::string& name, std::optional<double> lambda,
                        std::optional<double> alpha) {
  ExperimentPreset ep;
  ep.name = name;
  if (name == "example1") {
    ep.domain = "unit_square";
    ep.dim = 2;
    ep.problem.sources.points = {{0.25, 0.25, 0}, {0.75, 0.25, 0}, {0.25, 0.75, 0},
                                 {0.75, 0.75, 0}, {0.5, 0.5, 0}};
    ep.problem.lower.assign(5, -0.5);
    ep.problem.upper.assign(5, 1.0);
    ep.problem.lambda = lambda.value_or(1.0);
    ep.problem.weight_alpha = alpha.value_or(1.5);
    ep.problem.desired_state = [](const Point& x) {
      return -std::sin(2.0 * kPi * x[0]) * std::cos(2.0 * kPi * x[1]) *
             std::exp(x[0] * x[1]);
    };
  } else if (name == "example2") {
    ep.domain = "unit_square";
    ep.dim = 2;
    SourceSet D;
    D.points = {{0.25, 0.25, 0}, {0.75, 0.25, 0}, {0.25, 0.75, 0}, {0.75, 0.75, 0}};
    const double lam = lambda.value_or(1.0);
    const ScalarField p = [](const Point& x) {
      return -32.0 * x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1]);
    };
    const ScalarField lap_p = [](const Point& x) {
      return 64.0 * (x[1] * (1.0 - x[1]) + x[0] * (1.0 - x[0]));
    };
    ep.exact = build_case(p, lap_p, std::vector<double>(4, 0.3),
                          std::vector<double>(4, 2.0), lam, D, 0.0, 2);
    ep.problem.sources = D;
    ep.problem.lower.assign(4, 0.3);
    ep.problem.upper.assign(4, 2.0);
    ep.problem.lambda = lam;
    ep.problem.weight_alpha = alpha.value_or(1.0);
  } else if (name == "example3") {
    ep.domain = "lshape2d";
    ep.dim = 2;
    SourceSet D;
    D.points = {{0.5, 0.5, 0}};
    const double lam = lambda.value_or(1.0);
    const ScalarField p = [](const Point& x) {
      const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
      return std::pow(r, 2.0 / 3.0) * std::sin(2.0 * lshape_angle(x) / 3.0);
    };
    const ScalarField lap_p = [](const Point&) { return 0.0; };  // harmonic
    ep.exact = build_case(p, lap_p, {0.1}, {0.9}, lam, D, 0.0, 2);
    ep.problem.sources = D;
    ep.problem.lower = {0.1};
    ep.problem.upper = {0.9};
    ep.problem.lambda = lam;
    ep.problem.weight_alpha = alpha.value_or(1.0);
  } else if (name == "example4") {
    ep.domain = "unit_cube";
    ep.dim = 3;
    ep.problem.sources.points = {{0.25, 0.25, 0.25}, {0.75, 0.75, 0.75}};
    ep.problem.lower.assign(2, -0.5);
    ep.problem.upper.assign(2, 1.0);
    ep.problem.lambda = lambda.value_or(1.0);
    ep.problem.weight_alpha = alpha.value_or(1.99);
    ep.problem.desired_state = [](const Point& x) {
      return -std::sin(2.0 * kPi * x[0]) * std::sin(2.0 * kPi * x[1]) *
             std::sin(2.0 * kPi * x[2]) * std::exp(x[0] * x[1] * x[2]);
    };
  } else if (name == "example5") {
    ep.domain = "unit_cube";
    ep.dim = 3;
    SourceSet D;
    D.points = {{0.25, 0.25, 0.25}, {0.75, 0.75, 0.75}};
    const double lam = lambda.value_or(1.0);
    const ScalarField p = [](const Point& x) {
      return -64.0 * x[0] * x[1] * x[2] * x[2] * (1.0 - x[0]) * (1.0 - x[1]) *
             (1.0 - x[2]);
    };
    const ScalarField lap_p = [](const Point& x) {
      const double f1 = x[0] * (1.0 - x[0]);
      const double f2 = x[1] * (1.0 - x[1]);
      const double g3 = x[2] * x[2] * (1.0 - x[2]);
      const double g3pp = 2.0 - 6.0 * x[2];
      return -64.0 * (-2.0 * f2 * g3 - 2.0 * f1 * g3 + f1 * f2 * g3pp);
    };
    ep.exact = build_case(p, lap_p, std::vector<double>(2, 0.0),
                          std::vector<double>(2, 0.25), lam, D, 0.0, 3);
    ep.problem.sources = D;
    ep.problem.lower.assign(2, 0.0);
    ep.problem.upper.assign(2, 0.25);
    ep.problem.lambda = lam;
    ep.problem.weight_alpha = alpha.value_or(1.99);
  } else if (name == "example6") {
    ep.domain = "lshape3d";
    ep.dim = 3;
    ep.problem.sources.points = {{0.5, 0.5, 0.5}};
    ep.problem.lower = {-1.0};
    ep.problem.upper = {1.0};
    ep.problem.lambda = lambda.value_or(1.0);
    ep.problem.weight_alpha = alpha.value_or(1.99);
    ep.problem.desired_state = [](const Point&) { return 1.0; };
  } else {
    throw std::invalid_argument("preset: unknown name '" + name + "'");
  }
  if (ep.exact) {
    ep.problem.desired_state = ep.exact->desired_state;
    ep.problem.state_boundary_data = ep.exact->state_boundary_data;
    ep.problem.adjoint_boundary_data = ep.exact->adjoint_boundary_data;
  }
  return ep;
}

SimplicialMesh make_seed_mesh(const ExperimentPreset& ep, int pre_refinements) {
  return uniform_refine(build_initial_mesh(ep.domain), pre_refinements);
}

ExactErrors exact_errors(const OcpSolution& solution, const ManufacturedCase& mc,
                         const WeightSpec& spec, int graded_depth,
                         int quad_degree) {
  const SimplicialMesh& mesh = *solution.y.space->mesh;
  ExactErrors err;
  err.err_y = weighted_grad_error(solution.y, mc.exact_state_grad, spec,
                                  graded_depth, quad_degree);
  // Max-norm adjoint error sampled on the dyadic barycentric lattice of
  // denominator 4 plus vertices.
  constexpr int kLatticeDen = 4;
  double emax = 0.0;
  std::array<double, 4> lam{};
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const auto ev = mesh.element_vertices(t);
    const auto visit = [&](int a, int b, int c, int d) {
      lam = {static_cast<double>(a) / kLatticeDen, static_cast<double>(b) / kLatticeDen,
             static_cast<double>(c) / kLatticeDen, static_cast<double>(d) / kLatticeDen};
      Point x{0.0, 0.0, 0.0};
      double ph = 0.0;
      for (int i = 0; i <= mesh.dim; ++i) {
        x = x + lam[i] * ev[i];
        ph += lam[i] * solution.p.coeff[mesh.elements[t].v[i]];
      }
      emax = std::max(emax, std::abs(mc.exact_adjoint(x) - ph));
    };
    if (mesh.dim == 2) {
      for (int a = 0; a <= kLatticeDen; ++a)
        for (int b = 0; a + b <= kLatticeDen; ++b) visit(a, b, kLatticeDen - a - b, 0);
    } else {
      for (int a = 0; a <= kLatticeDen; ++a)
        for (int b = 0; a + b <= kLatticeDen; ++b)
          for (int c = 0; a + b + c <= kLatticeDen; ++c)
            visit(a, b, c, kLatticeDen - a - b - c);
    }
  }
  err.err_p = emax;
  double du2 = 0.0;
  for (size_t k = 0; k < solution.u.size(); ++k) {
    const double d = solution.u[k] - mc.exact_control[k];
    du2 += d * d;
  }
  err.err_u = std::sqrt(du2);
  err.err_total = std::sqrt(err.err_y * err.err_y + err.err_p * err.err_p + du2);
  return err;
}

}  // namespace ocplab
