#include "ocplab/ocp_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ocplab {

int default_quad_degree(int dim) { return dim == 2 ? 10 : 8; }

void OcpProblem::validate(int dim) const {
  const int l = sources.size();
  if (l == 0) throw std::invalid_argument("OcpProblem: empty source set");
  if (static_cast<int>(lower.size()) != l || static_cast<int>(upper.size()) != l)
    throw std::invalid_argument("OcpProblem: bound size mismatch");
  for (int k = 0; k < l; ++k)
    if (!(lower[k] < upper[k]))
      throw std::invalid_argument("OcpProblem: bounds must satisfy a < b");
  if (!(lambda > 0.0)) throw std::invalid_argument("OcpProblem: lambda must be positive");
  if (!(weight_alpha > dim - 2.0 && weight_alpha < 2.0))
    throw std::invalid_argument("OcpProblem: alpha outside (n-2, 2)");
  if (!desired_state) throw std::invalid_argument("OcpProblem: missing desired state");
}

namespace {

std::vector<double> boundary_values(const P1Space& space, const ScalarField& g) {
  if (!g) return {};
  std::vector<double> vals(space.n_dofs, 0.0);
  const SimplicialMesh& mesh = *space.mesh;
  for (int i = 0; i < space.n_dofs; ++i)
    if (space.is_dirichlet[i]) vals[i] = g(mesh.vertices[i]);
  return vals;
}

double clamp_control(double a, double b, double v) {
  return std::max(a, std::min(b, v));
}

}  // namespace

ReducedOperator reduced_operator(const P1Space& space, const OcpProblem& problem,
                                 const SolverOptions& opts,
                                 const ReducedWarmStart* warm) {
  const SimplicialMesh& mesh = *space.mesh;
  problem.validate(mesh.dim);
  const int l = problem.sources.size();
  const int quad = opts.quad_degree > 0 ? opts.quad_degree : default_quad_degree(mesh.dim);

  const SparseSpdMatrix A = assemble_stiffness(space);
  const SparseSpdMatrix M = assemble_mass(space);
  const std::vector<double> b_desired =
      assemble_l2_load(space, problem.desired_state, quad);

  ReducedOperator op;
  op.y_unit.resize(l);
  op.p_unit.resize(l);

  auto track = [&op](const SolveInfo& info) {
    op.max_rel_residual = std::max(op.max_rel_residual, info.rel_residual);
  };

  // Locate the sources once; point values are barycentric combinations.
  std::vector<int> src_elem(l);
  std::vector<std::array<double, 4>> src_bary(l);
  for (int k = 0; k < l; ++k) {
    const int t = mesh.find_element(problem.sources.points[k]);
    if (t < 0) throw std::invalid_argument("reduced_operator: source outside mesh");
    src_elem[k] = t;
    const auto ev = mesh.element_vertices(t);
    src_bary[k] = barycentric(mesh.dim, std::span<const Point>(ev.data(), mesh.dim + 1),
                              problem.sources.points[k]);
  }
  auto value_at_sources = [&](const std::vector<double>& coeff, std::vector<double>& out) {
    out.assign(l, 0.0);
    for (int k = 0; k < l; ++k) {
      const auto& e = mesh.elements[src_elem[k]];
      for (int i = 0; i <= mesh.dim; ++i)
        out[k] += src_bary[k][i] * coeff[e.v[i]];
    }
  };

  // Affine state part: harmonic extension of the state boundary data.
  const std::vector<double> state_bv = boundary_values(space, problem.state_boundary_data);
  op.y_affine.assign(space.n_dofs, 0.0);
  if (!state_bv.empty()) {
    std::vector<double> rhs(space.n_dofs, 0.0);
    apply_dirichlet(A, rhs, space, state_bv);
    track(solve_spd(A, rhs, space, op.y_affine, opts.cg_tol, -1,
                    warm ? &warm->y_affine : nullptr));
  }

  // Unit state responses (homogeneous boundary data).
  std::vector<double> unit(l, 0.0);
  for (int j = 0; j < l; ++j) {
    std::fill(unit.begin(), unit.end(), 0.0);
    unit[j] = 1.0;
    std::vector<double> rhs = assemble_point_source_load(space, problem.sources, unit);
    apply_dirichlet(A, rhs, space, {});
    track(solve_spd(A, rhs, space, op.y_unit[j], opts.cg_tol, -1,
                    warm ? &warm->y_unit[j] : nullptr));
  }

  // Adjoint affine part: forcing y_affine - y_d, optional adjoint data.
  const std::vector<double> adj_bv = boundary_values(space, problem.adjoint_boundary_data);
  {
    std::vector<double> rhs(space.n_dofs, 0.0);
    M.multiply(op.y_affine, rhs);
    for (int i = 0; i < space.n_dofs; ++i) rhs[i] -= b_desired[i];
    apply_dirichlet(A, rhs, space, adj_bv);
    track(solve_spd(A, rhs, space, op.p_affine, opts.cg_tol, -1,
                    warm ? &warm->p_affine : nullptr));
  }

  // Unit adjoint responses driven by the unit states.
  for (int j = 0; j < l; ++j) {
    std::vector<double> rhs(space.n_dofs, 0.0);
    M.multiply(op.y_unit[j], rhs);
    apply_dirichlet(A, rhs, space, {});
    track(solve_spd(A, rhs, space, op.p_unit[j], opts.cg_tol, -1,
                    warm ? &warm->p_unit[j] : nullptr));
  }

  op.G.resize(l);
  for (int j = 0; j < l; ++j) value_at_sources(op.p_unit[j], op.G[j]);
  value_at_sources(op.p_affine, op.offset);
  return op;
}

OcpSolution solve_active_set(const OcpProblem& problem, const P1Space& space,
                             const SolverOptions& opts,
                             const std::vector<double>* warm_u,
                             const ReducedWarmStart* warm, ReducedOperator* op_out) {
  const int l = problem.sources.size();
  ReducedOperator op = reduced_operator(space, problem, opts, warm);

  Eigen::MatrixXd G(l, l);
  for (int j = 0; j < l; ++j)
    for (int k = 0; k < l; ++k) G(k, j) = op.G[j][k];
  // The Gram structure makes G symmetric up to solver tolerance; symmetrize.
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::VectorXd c(l);
  for (int k = 0; k < l; ++k) c(k) = op.offset[k];
  const Eigen::MatrixXd H = problem.lambda * Eigen::MatrixXd::Identity(l, l) + G;

  Eigen::VectorXd u(l);
  if (warm_u) {
    for (int k = 0; k < l; ++k)
      u(k) = clamp_control(problem.lower[k], problem.upper[k], (*warm_u)[k]);
  } else {
    const Eigen::VectorXd unconstrained = H.ldlt().solve(-c);
    for (int k = 0; k < l; ++k)
      u(k) = clamp_control(problem.lower[k], problem.upper[k], unconstrained(k));
  }

  using SetPair = std::pair<std::vector<int>, std::vector<int>>;
  auto active_sets = [&](const Eigen::VectorXd& uu) {
    const Eigen::VectorXd pi = c + G * uu;
    SetPair s;
    for (int k = 0; k < l; ++k) {
      const double v = -pi(k) / problem.lambda;
      if (v < problem.lower[k]) s.first.push_back(k);
      else if (v > problem.upper[k]) s.second.push_back(k);
    }
    return s;
  };
  auto qp_solve = [&](const SetPair& s) {
    Eigen::VectorXd uu(l);
    std::vector<char> fixed(l, 0);
    for (int k : s.first) {
      uu(k) = problem.lower[k];
      fixed[k] = 1;
    }
    for (int k : s.second) {
      uu(k) = problem.upper[k];
      fixed[k] = 1;
    }
    std::vector<int> inactive;
    for (int k = 0; k < l; ++k)
      if (!fixed[k]) inactive.push_back(k);
    const int m = static_cast<int>(inactive.size());
    if (m > 0) {
      Eigen::MatrixXd Hii(m, m);
      Eigen::VectorXd r(m);
      for (int a = 0; a < m; ++a) {
        r(a) = -c(inactive[a]);
        for (int k = 0; k < l; ++k)
          if (fixed[k]) r(a) -= G(inactive[a], k) * uu(k);
        for (int b = 0; b < m; ++b) Hii(a, b) = H(inactive[a], inactive[b]);
      }
      const Eigen::VectorXd ui = Hii.ldlt().solve(r);
      for (int a = 0; a < m; ++a) uu(inactive[a]) = ui(a);
    }
    return uu;
  };

  SetPair sets = active_sets(u);
  u = qp_solve(sets);
  std::vector<SetPair> history;
  int iterations = 1;
  bool converged = false;
  for (int it = 1; it <= opts.max_active_set_iter; ++it, ++iterations) {
    const SetPair next = active_sets(u);
    if (next == sets) {
      converged = true;
      break;
    }
    for (const SetPair& seen : history) {
      if (seen == next)
        throw ActiveSetFailure("solve_active_set: active-set cycling detected", -1.0);
    }
    history.push_back(sets);
    sets = next;
    u = qp_solve(sets);
  }
  const Eigen::VectorXd pi = c + G * u;
  double residual = 0.0;
  for (int k = 0; k < l; ++k) {
    const double proj = clamp_control(problem.lower[k], problem.upper[k],
                                      -pi(k) / problem.lambda);
    residual = std::max(residual, std::abs(u(k) - proj));
  }
  if (!converged || residual > opts.active_set_tol)
    throw ActiveSetFailure("solve_active_set: no convergence within iteration limit",
                           residual);

  OcpSolution sol;
  sol.iterations = iterations;
  sol.max_rel_residual = op.max_rel_residual;
  sol.u.assign(l, 0.0);
  for (int k = 0; k < l; ++k) sol.u[k] = u(k);
  sol.active_lower = sets.first;
  sol.active_upper = sets.second;
  sol.y.space = &space;
  sol.p.space = &space;
  sol.y.coeff = op.y_affine;
  sol.p.coeff = op.p_affine;
  for (int j = 0; j < l; ++j) {
    for (int i = 0; i < space.n_dofs; ++i) {
      sol.y.coeff[i] += u(j) * op.y_unit[j][i];
      sol.p.coeff[i] += u(j) * op.p_unit[j][i];
    }
  }
  if (op_out) *op_out = std::move(op);
  return sol;
}

double vi_residual(const OcpSolution& solution, const OcpProblem& problem) {
  double r = 0.0;
  for (int k = 0; k < problem.sources.size(); ++k) {
    const double pz = evaluate(solution.p, problem.sources.points[k]);
    const double proj = clamp_control(problem.lower[k], problem.upper[k],
                                      -pz / problem.lambda);
    r = std::max(r, std::abs(solution.u[k] - proj));
  }
  return r;
}

double evaluate_cost(const OcpSolution& solution, const OcpProblem& problem,
                     int quad_degree) {
  const SimplicialMesh& mesh = *solution.y.space->mesh;
  const int quad = quad_degree > 0 ? quad_degree : default_quad_degree(mesh.dim);
  const QuadRule& rule = simplex_rule(mesh.dim, quad);
  double tracking = 0.0;
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const auto ev = mesh.element_vertices(t);
    const std::span<const Point> vs(ev.data(), mesh.dim + 1);
    const double vol = simplex_volume(mesh.dim, vs);
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      const Point x = rule.map(vs, q);
      double yv = 0.0;
      for (int i = 0; i <= mesh.dim; ++i)
        yv += rule.bary[q][i] * solution.y.coeff[mesh.elements[t].v[i]];
      const double diff = yv - problem.desired_state(x);
      tracking += vol * rule.weights[q] * diff * diff;
    }
  }
  double unorm2 = 0.0;
  for (double v : solution.u) unorm2 += v * v;
  return 0.5 * tracking + 0.5 * problem.lambda * unorm2;
}

}  // namespace ocplab
