#include "ocplab/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ocplab {

P1Space make_p1_space(const SimplicialMesh& mesh) {
  P1Space space;
  space.mesh = &mesh;
  space.n_dofs = mesh.n_vertices();
  space.is_dirichlet.assign(space.n_dofs, 0);
  for (const auto& f : mesh.boundary_faces)
    for (int i = 0; i < mesh.dim; ++i) space.is_dirichlet[f[i]] = 1;
  space.n_free = 0;
  for (char d : space.is_dirichlet)
    if (!d) ++space.n_free;
  return space;
}

void SparseSpdMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += vals[k] * x[cols[k]];
    y[i] = s;
  }
}

double& SparseSpdMatrix::coeff_ref(int i, int j) {
  const auto begin = cols.begin() + row_ptr[i];
  const auto end = cols.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) throw std::logic_error("coeff_ref: entry not in pattern");
  return vals[it - cols.begin()];
}

double SparseSpdMatrix::coeff(int i, int j) const {
  const auto begin = cols.begin() + row_ptr[i];
  const auto end = cols.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  return (it == end || *it != j) ? 0.0 : vals[it - cols.begin()];
}

namespace {

// CSR pattern of vertex-to-vertex adjacency (including the diagonal).
SparseSpdMatrix make_pattern(const P1Space& space) {
  const SimplicialMesh& mesh = *space.mesh;
  std::vector<std::vector<int>> adj(space.n_dofs);
  for (const auto& e : mesh.elements)
    for (int i = 0; i <= mesh.dim; ++i)
      for (int j = 0; j <= mesh.dim; ++j) adj[e.v[i]].push_back(e.v[j]);
  SparseSpdMatrix m;
  m.n = space.n_dofs;
  m.row_ptr.assign(m.n + 1, 0);
  for (int i = 0; i < m.n; ++i) {
    auto& row = adj[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    m.row_ptr[i + 1] = m.row_ptr[i] + static_cast<int>(row.size());
  }
  m.cols.reserve(m.row_ptr[m.n]);
  for (int i = 0; i < m.n; ++i)
    m.cols.insert(m.cols.end(), adj[i].begin(), adj[i].end());
  m.vals.assign(m.cols.size(), 0.0);
  return m;
}

void check_element_volume(const SimplicialMesh& mesh, int t, double vol) {
  if (!(vol > 0.0))
    throw std::runtime_error("assembly: degenerate element " + std::to_string(t));
  (void)mesh;
}

}  // namespace

SparseSpdMatrix assemble_stiffness(const P1Space& space) {
  const SimplicialMesh& mesh = *space.mesh;
  SparseSpdMatrix A = make_pattern(space);
  std::array<Point, 4> grad;
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const auto ev = mesh.element_vertices(t);
    const std::span<const Point> vs(ev.data(), mesh.dim + 1);
    const double vol = simplex_volume(mesh.dim, vs);
    check_element_volume(mesh, t, vol);
    barycentric_gradients(mesh.dim, vs, std::span<Point>(grad.data(), mesh.dim + 1));
    const auto& e = mesh.elements[t];
    for (int i = 0; i <= mesh.dim; ++i)
      for (int j = 0; j <= mesh.dim; ++j)
        A.coeff_ref(e.v[i], e.v[j]) += vol * dot(grad[i], grad[j]);
  }
  return A;
}

SparseSpdMatrix assemble_mass(const P1Space& space) {
  const SimplicialMesh& mesh = *space.mesh;
  SparseSpdMatrix M = make_pattern(space);
  const int d = mesh.dim;
  const double offdiag = 1.0 / ((d + 1.0) * (d + 2.0));
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const double vol = mesh.element_volume(t);
    check_element_volume(mesh, t, vol);
    const auto& e = mesh.elements[t];
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j)
        M.coeff_ref(e.v[i], e.v[j]) += vol * offdiag * (i == j ? 2.0 : 1.0);
  }
  return M;
}

std::vector<double> assemble_point_source_load(const P1Space& space,
                                               const SourceSet& D,
                                               std::span<const double> u) {
  if (static_cast<int>(u.size()) != D.size())
    throw std::invalid_argument("point_source_load: control size mismatch");
  const SimplicialMesh& mesh = *space.mesh;
  std::vector<double> b(space.n_dofs, 0.0);
  for (int k = 0; k < D.size(); ++k) {
    const int t = mesh.find_element(D.points[k]);
    if (t < 0)
      throw std::invalid_argument("point_source_load: source point outside the mesh");
    const auto ev = mesh.element_vertices(t);
    const auto lam = barycentric(mesh.dim, std::span<const Point>(ev.data(), mesh.dim + 1), D.points[k]);
    for (int i = 0; i <= mesh.dim; ++i)
      b[mesh.elements[t].v[i]] += u[k] * std::max(lam[i], 0.0);
  }
  return b;
}

std::vector<double> assemble_l2_load(const P1Space& space, const ScalarField& g,
                                     int quad_degree) {
  const SimplicialMesh& mesh = *space.mesh;
  const QuadRule& rule = simplex_rule(mesh.dim, quad_degree);
  std::vector<double> b(space.n_dofs, 0.0);
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const auto ev = mesh.element_vertices(t);
    const std::span<const Point> vs(ev.data(), mesh.dim + 1);
    const double vol = simplex_volume(mesh.dim, vs);
    const auto& e = mesh.elements[t];
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      const double gw = vol * rule.weights[q] * g(rule.map(vs, q));
      for (int i = 0; i <= mesh.dim; ++i)
        b[e.v[i]] += gw * rule.bary[q][i];
    }
  }
  return b;
}

void apply_dirichlet(const SparseSpdMatrix& A, std::vector<double>& rhs,
                     const P1Space& space,
                     std::span<const double> boundary_values) {
  const bool homogeneous = boundary_values.empty();
  if (!homogeneous && static_cast<int>(boundary_values.size()) != space.n_dofs)
    throw std::invalid_argument("apply_dirichlet: boundary value size mismatch");
  if (!homogeneous) {
    for (int i = 0; i < A.n; ++i) {
      if (space.is_dirichlet[i]) continue;
      double corr = 0.0;
      for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
        if (space.is_dirichlet[A.cols[k]]) corr += A.vals[k] * boundary_values[A.cols[k]];
      rhs[i] -= corr;
    }
  }
  for (int i = 0; i < A.n; ++i)
    if (space.is_dirichlet[i]) rhs[i] = homogeneous ? 0.0 : boundary_values[i];
}

SolveInfo solve_spd(const SparseSpdMatrix& A, std::span<const double> rhs,
                    const P1Space& space, std::vector<double>& x,
                    double rel_tol, int max_iter, const std::vector<double>* x0) {
  const int n = A.n;
  if (max_iter < 0) max_iter = 10 * n;
  // The rhs is already lifted (apply_dirichlet), so CG runs with zero
  // Dirichlet entries; the prescribed values are written at the end.
  x.assign(n, 0.0);
  if (x0) {
    for (int i = 0; i < n; ++i)
      if (!space.is_dirichlet[i]) x[i] = (*x0)[i];
  }

  std::vector<double> r(n, 0.0), zv(n, 0.0), p(n, 0.0), Ap(n, 0.0), diag(n, 1.0);
  for (int i = 0; i < n; ++i) {
    if (space.is_dirichlet[i]) continue;
    const double d = A.coeff(i, i);
    diag[i] = d > 0.0 ? d : 1.0;
  }

  const auto finish = [&]() {
    for (int i = 0; i < n; ++i)
      if (space.is_dirichlet[i]) x[i] = rhs[i];
  };

  double bnorm2 = 0.0;
  for (int i = 0; i < n; ++i)
    if (!space.is_dirichlet[i]) bnorm2 += rhs[i] * rhs[i];
  if (bnorm2 == 0.0) {
    for (int i = 0; i < n; ++i)
      if (!space.is_dirichlet[i]) x[i] = 0.0;
    finish();
    return {0, 0.0};
  }

  auto residual = [&]() {
    A.multiply(x, Ap);
    double rr = 0.0;
    for (int i = 0; i < n; ++i) {
      r[i] = space.is_dirichlet[i] ? 0.0 : rhs[i] - Ap[i];
      rr += r[i] * r[i];
    }
    return rr;
  };

  double rr = residual();
  const double target2 = rel_tol * rel_tol * bnorm2;
  if (rr <= target2) {
    finish();
    return {0, std::sqrt(rr / bnorm2)};
  }

  double rz = 0.0;
  for (int i = 0; i < n; ++i) {
    zv[i] = r[i] / diag[i];
    p[i] = zv[i];
    rz += r[i] * zv[i];
  }
  int it = 0;
  for (; it < max_iter; ++it) {
    A.multiply(p, Ap);
    double pAp = 0.0;
    for (int i = 0; i < n; ++i)
      if (!space.is_dirichlet[i]) pAp += p[i] * Ap[i];
    const double alpha = rz / pAp;
    rr = 0.0;
    for (int i = 0; i < n; ++i) {
      if (space.is_dirichlet[i]) continue;
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
      rr += r[i] * r[i];
    }
    if (rr <= target2) break;
    double rz_new = 0.0;
    for (int i = 0; i < n; ++i) {
      if (space.is_dirichlet[i]) continue;
      zv[i] = r[i] / diag[i];
      rz_new += r[i] * zv[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i)
      if (!space.is_dirichlet[i]) p[i] = zv[i] + beta * p[i];
  }
  const double rel = std::sqrt(rr / bnorm2);
  if (rel > rel_tol)
    throw SolverFailure("solve_spd: CG did not converge, relative residual " +
                            std::to_string(rel),
                        rel);
  finish();
  return {it + 1, rel};
}

double FeFunction::evaluate_in(int t, const Point& x) const {
  const SimplicialMesh& mesh = *space->mesh;
  const auto ev = mesh.element_vertices(t);
  const auto lam = barycentric(mesh.dim, std::span<const Point>(ev.data(), mesh.dim + 1), x);
  double s = 0.0;
  for (int i = 0; i <= mesh.dim; ++i) s += lam[i] * coeff[mesh.elements[t].v[i]];
  return s;
}

Point FeFunction::gradient(int t) const {
  const SimplicialMesh& mesh = *space->mesh;
  const auto ev = mesh.element_vertices(t);
  std::array<Point, 4> grad;
  barycentric_gradients(mesh.dim, std::span<const Point>(ev.data(), mesh.dim + 1),
                        std::span<Point>(grad.data(), mesh.dim + 1));
  Point g{0.0, 0.0, 0.0};
  for (int i = 0; i <= mesh.dim; ++i)
    g = g + coeff[mesh.elements[t].v[i]] * grad[i];
  return g;
}

double evaluate(const FeFunction& f, const Point& x) {
  const int t = f.space->mesh->find_element(x);
  if (t < 0) throw std::invalid_argument("evaluate: point outside the mesh");
  return f.evaluate_in(t, x);
}

Point evaluate_gradient(const FeFunction& f, int t) {
  if (t < 0 || t >= f.space->mesh->n_elements())
    throw std::invalid_argument("evaluate_gradient: element index out of range");
  return f.gradient(t);
}

double gradient_jump(const FeFunction& f, const InteriorSide& side) {
  if (side.t_plus < 0 || side.t_minus < 0)
    throw std::invalid_argument("gradient_jump: boundary side supplied");
  const Point gp = f.gradient(side.t_plus);
  const Point gm = f.gradient(side.t_minus);
  return dot(side.normal_plus, gp - gm);
}

std::vector<double> prolongate(const SimplicialMesh& fine,
                               std::span<const double> coarse) {
  std::vector<double> out(fine.n_vertices(), 0.0);
  std::copy(coarse.begin(), coarse.end(), out.begin());
  for (int v = static_cast<int>(coarse.size()); v < fine.n_vertices(); ++v) {
    const auto& pa = fine.vertex_parents[v];
    if (pa[0] < 0 || pa[0] >= v || pa[1] >= v)
      throw std::invalid_argument("prolongate: mesh is not a refinement of the source");
    out[v] = 0.5 * (out[pa[0]] + out[pa[1]]);
  }
  return out;
}

}  // namespace ocplab
