// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. The three manufactured convergence runs are shared across criteria.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ocplab/adapt.hpp"
#include "ocplab/cli.hpp"

using namespace ocplab;

namespace {

struct RunData {
  ExperimentPreset preset;
  std::vector<AfemRecord> records;
};

const RunData& shared_run(const std::string& name, long long max_ndof) {
  static std::map<std::string, RunData> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  RunData data{preset(name), {}};
  StopRule stop;
  stop.max_ndof = max_ndof;
  data.records = run_afem(data.preset.problem, make_seed_mesh(data.preset), stop,
                          data.preset.exact ? &*data.preset.exact : nullptr);
  return cache.emplace(name, std::move(data)).first->second;
}

const RunData& run_ex2() { return shared_run("example2", 100000); }
const RunData& run_ex3() { return shared_run("example3", 100000); }
const RunData& run_ex5() { return shared_run("example5", 300000); }

void report(int criterion, const std::string& name, bool ok) {
  std::printf("[acceptance] criterion %2d (%s): %s\n", criterion, name.c_str(),
              ok ? "PASS" : "FAIL");
  std::fflush(stdout);
}

std::vector<double> field(const std::vector<AfemRecord>& recs,
                          double AfemRecord::* member) {
  std::vector<double> out;
  for (const auto& r : recs) out.push_back(r.*member);
  return out;
}

std::vector<double> opt_field(const std::vector<AfemRecord>& recs,
                              std::optional<double> AfemRecord::* member) {
  std::vector<double> out;
  for (const auto& r : recs) out.push_back((r.*member).value());
  return out;
}

std::vector<double> ndof_of(const std::vector<AfemRecord>& recs) {
  std::vector<double> out;
  for (const auto& r : recs) out.push_back(static_cast<double>(r.ndof));
  return out;
}

bool check_slope(const std::vector<AfemRecord>& recs, const char* label,
                 std::vector<double> values, int window, double lo, double hi) {
  const double slope = fit_rate(ndof_of(recs), values, window);
  const bool ok = slope >= lo && slope <= hi;
  std::printf("  slope(%s) = %+.4f, band [%+.2f, %+.2f]\n", label, slope, lo, hi);
  CHECK(ok);
  return ok;
}

bool residuals_ok(const std::vector<AfemRecord>& recs) {
  bool ok = true;
  for (const auto& r : recs) {
    ok = ok && r.vi_residual <= 1e-10 && r.solver_residual <= 1e-12;
    CHECK(r.vi_residual <= 1e-10);
    CHECK(r.solver_residual <= 1e-12);
  }
  return ok;
}

}  // namespace

TEST_CASE("criterion 1: optimality-system consistency on every preset") {
  bool ok = true;
  for (const auto& [name, max_ndof] :
       std::vector<std::pair<std::string, long long>>{
           {"example1", 20000}, {"example4", 30000}, {"example6", 30000}}) {
    const auto& data = shared_run(name, max_ndof);
    ok = residuals_ok(data.records) && ok;
  }
  ok = residuals_ok(run_ex2().records) && ok;
  ok = residuals_ok(run_ex3().records) && ok;
  ok = residuals_ok(run_ex5().records) && ok;
  report(1, "optimality-system consistency", ok);
}

TEST_CASE("criterion 2: L-shape control error is exact") {
  const auto& recs = run_ex3().records;
  bool ok = !recs.empty();
  for (const auto& r : recs) {
    REQUIRE(r.err_u.has_value());
    ok = ok && *r.err_u <= 1e-12;
    CHECK(*r.err_u <= 1e-12);
  }
  bool reached = recs.back().ndof >= 20000;
  CHECK(reached);
  report(2, "L-shape control exactness", ok && reached);
}

TEST_CASE("criterion 3: 2d convergence rates") {
  bool ok = true;
  for (const RunData* data : {&run_ex2(), &run_ex3()}) {
    std::printf("  [%s]\n", data->preset.name.c_str());
    const auto& recs = data->records;
    ok = check_slope(recs, "err_total", opt_field(recs, &AfemRecord::err_total), 10,
                     -0.65, -0.35) && ok;
    ok = check_slope(recs, "eocp", field(recs, &AfemRecord::eocp), 10, -0.65,
                     -0.35) && ok;
    ok = check_slope(recs, "err_p", opt_field(recs, &AfemRecord::err_p), 10, -1.2,
                     -0.7) && ok;
    ok = check_slope(recs, "ep", field(recs, &AfemRecord::ep), 10, -1.2, -0.7) && ok;
    CHECK(recs.back().ndof >= 100000);
    ok = ok && recs.back().ndof >= 100000;
  }
  report(3, "2d rates", ok);
}

TEST_CASE("criterion 4: 3d convergence rates") {
  const auto& recs = run_ex5().records;
  bool ok = recs.back().ndof >= 300000;
  CHECK(recs.back().ndof >= 300000);
  // Desk-scale window choice: the last 6 records are the most asymptotic
  // stretch reachable at 3e5 dofs for the ocp-level quantities; the adjoint
  // contributions use the window of the rates-command reference.
  ok = check_slope(recs, "eocp", field(recs, &AfemRecord::eocp), 6, -0.45, -0.22) && ok;
  ok = check_slope(recs, "err_total", opt_field(recs, &AfemRecord::err_total), 6,
                   -0.45, -0.22) && ok;
  ok = check_slope(recs, "ep", field(recs, &AfemRecord::ep), 8, -0.85, -0.5) && ok;
  ok = check_slope(recs, "err_p", opt_field(recs, &AfemRecord::err_p), 8, -0.85,
                   -0.5) && ok;
  report(4, "3d rates", ok);
}

TEST_CASE("criterion 5: effectivity stability") {
  bool ok = true;
  for (const RunData* data : {&run_ex2(), &run_ex3(), &run_ex5()}) {
    const auto& recs = data->records;
    double lo = 1e300, hi = 0.0, tail_lo = 1e300, tail_hi = 0.0;
    for (size_t i = 5; i < recs.size(); ++i) {
      REQUIRE(recs[i].effectivity.has_value());
      const double eff = *recs[i].effectivity;
      lo = std::min(lo, eff);
      hi = std::max(hi, eff);
      if (i + 5 >= recs.size()) {
        tail_lo = std::min(tail_lo, eff);
        tail_hi = std::max(tail_hi, eff);
      }
    }
    std::printf("  [%s] effectivity range [%.3f, %.3f], final-5 ratio %.3f\n",
                data->preset.name.c_str(), lo, hi, tail_hi / tail_lo);
    const bool in_band = lo >= 0.5 && hi <= 50.0;
    const bool stable = tail_hi / tail_lo < 3.0;
    CHECK(in_band);
    CHECK(stable);
    ok = ok && in_band && stable;
  }
  report(5, "effectivity stability", ok);
}

// ----------------------------------------------------------------------------
// Criterion 6: independent brute-force recomputation of the indicators.
// Everything below is deliberately written from scratch against the formulas,
// sharing no code with the library paths it checks.
namespace oracle {

double det2(double a, double b, double c, double d) { return a * d - b * c; }

Point grad_of(const SimplicialMesh& m, int t, const std::vector<double>& coef) {
  const auto& e = m.elements[t];
  const int d = m.dim;
  // Solve for the affine function values -> gradient via a dense system.
  if (d == 2) {
    const Point a = m.vertices[e.v[0]], b = m.vertices[e.v[1]], c = m.vertices[e.v[2]];
    const double J = det2(b[0] - a[0], c[0] - a[0], b[1] - a[1], c[1] - a[1]);
    const double db = coef[e.v[1]] - coef[e.v[0]];
    const double dc = coef[e.v[2]] - coef[e.v[0]];
    return {det2(db, b[1] - a[1], dc, c[1] - a[1]) / J,
            det2(b[0] - a[0], db, c[0] - a[0], dc) / J, 0.0};
  }
  const Point a = m.vertices[e.v[0]];
  double A[3][3], rhs[3];
  for (int r = 0; r < 3; ++r) {
    const Point p = m.vertices[e.v[r + 1]];
    A[r][0] = p[0] - a[0];
    A[r][1] = p[1] - a[1];
    A[r][2] = p[2] - a[2];
    rhs[r] = coef[e.v[r + 1]] - coef[e.v[0]];
  }
  // Cramer.
  const double J = A[0][0] * det2(A[1][1], A[1][2], A[2][1], A[2][2]) -
                   A[0][1] * det2(A[1][0], A[1][2], A[2][0], A[2][2]) +
                   A[0][2] * det2(A[1][0], A[1][1], A[2][0], A[2][1]);
  Point g{0, 0, 0};
  for (int k = 0; k < 3; ++k) {
    double B[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) B[r][c] = (c == k) ? rhs[r] : A[r][c];
    g[k] = (B[0][0] * det2(B[1][1], B[1][2], B[2][1], B[2][2]) -
            B[0][1] * det2(B[1][0], B[1][2], B[2][0], B[2][2]) +
            B[0][2] * det2(B[1][0], B[1][1], B[2][0], B[2][1])) /
           J;
  }
  return g;
}

double h_of(const SimplicialMesh& m, int t) {
  double h = 0.0;
  for (int i = 0; i <= m.dim; ++i)
    for (int j = i + 1; j <= m.dim; ++j)
      h = std::max(h, distance(m.vertices[m.elements[t].v[i]],
                               m.vertices[m.elements[t].v[j]]));
  return h;
}

double DT_of(const SimplicialMesh& m, int t, const std::vector<Point>& sources) {
  double best = 1e300;
  for (const Point& z : sources) {
    double far = 0.0;
    for (int i = 0; i <= m.dim; ++i)
      far = std::max(far, distance(m.vertices[m.elements[t].v[i]], z));
    best = std::min(best, far);
  }
  return best;
}

// || P1 function ||^2_{L^2(T)} from nodal values (exact closed form).
double p1_l2sq(const SimplicialMesh& m, int t, const std::vector<double>& nodal) {
  const auto& e = m.elements[t];
  double vol;
  if (m.dim == 2) {
    const Point a = m.vertices[e.v[0]], b = m.vertices[e.v[1]], c = m.vertices[e.v[2]];
    vol = 0.5 * std::abs(det2(b[0] - a[0], c[0] - a[0], b[1] - a[1], c[1] - a[1]));
  } else {
    const Point a = m.vertices[e.v[0]];
    const Point u = m.vertices[e.v[1]] - a, v = m.vertices[e.v[2]] - a,
                w = m.vertices[e.v[3]] - a;
    vol = std::abs(dot(u, cross(v, w))) / 6.0;
  }
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i <= m.dim; ++i) {
    sum += nodal[e.v[i]];
    sumsq += nodal[e.v[i]] * nodal[e.v[i]];
  }
  return vol / ((m.dim + 1.0) * (m.dim + 2.0)) * (sum * sum + sumsq);
}

struct Side {
  std::vector<int> verts;
  int ta, tb;
  double measure;
  Point normal;  // from ta to tb
};

std::vector<Side> sides_of(const SimplicialMesh& m) {
  std::vector<Side> sides;
  for (int a = 0; a < m.n_elements(); ++a) {
    for (int b = a + 1; b < m.n_elements(); ++b) {
      std::vector<int> shared;
      for (int i = 0; i <= m.dim; ++i)
        for (int j = 0; j <= m.dim; ++j)
          if (m.elements[a].v[i] == m.elements[b].v[j])
            shared.push_back(m.elements[a].v[i]);
      if (static_cast<int>(shared.size()) != m.dim) continue;
      Side s;
      s.verts = shared;
      s.ta = a;
      s.tb = b;
      if (m.dim == 2) {
        const Point e = m.vertices[shared[1]] - m.vertices[shared[0]];
        s.measure = norm(e);
        s.normal = {e[1] / s.measure, -e[0] / s.measure, 0.0};
      } else {
        const Point u = m.vertices[shared[1]] - m.vertices[shared[0]];
        const Point v = m.vertices[shared[2]] - m.vertices[shared[0]];
        const Point n = cross(u, v);
        s.measure = 0.5 * norm(n);
        s.normal = (1.0 / norm(n)) * n;
      }
      // Point away from the remaining vertex of ta.
      Point opp{0, 0, 0};
      for (int i = 0; i <= m.dim; ++i) {
        bool in_side = false;
        for (int sv : shared)
          if (m.elements[a].v[i] == sv) in_side = true;
        if (!in_side) opp = m.vertices[m.elements[a].v[i]];
      }
      Point mid{0, 0, 0};
      for (int sv : shared) mid = mid + m.vertices[sv];
      mid = (1.0 / m.dim) * mid;
      if (dot(s.normal, mid - opp) < 0.0) s.normal = -1.0 * s.normal;
      sides.push_back(s);
    }
  }
  return sides;
}

}  // namespace oracle

TEST_CASE("criterion 6: estimator oracle equivalence") {
  bool ok = true;
  for (const int dim : {2, 3}) {
    const auto mesh = dim == 2 ? uniform_refine(build_initial_mesh("unit_square"), 2)
                               : build_initial_mesh("unit_cube");
    REQUIRE(mesh.n_elements() <= 50);
    const auto space = make_p1_space(mesh);

    std::mt19937 rng(97 + dim);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    FeFunction y{&space, std::vector<double>(space.n_dofs, 0.0)};
    FeFunction p{&space, std::vector<double>(space.n_dofs, 0.0)};
    for (double& c : y.coeff) c = unif(rng);
    for (double& c : p.coeff) c = unif(rng);
    // Linear desired state keeps every integrand inside the exactness range
    // of both the module quadrature and the closed-form oracle.
    const auto y_d = [](const Point& x) { return 0.7 * x[0] - 0.3 * x[1] + 0.1; };
    SourceSet D{dim == 2 ? std::vector<Point>{{0.25, 0.25, 0}, {0.75, 0.75, 0}}
                         : std::vector<Point>{{0.25, 0.25, 0.25}, {0.75, 0.75, 0.75}}};
    std::vector<double> u{0.8, -0.6};
    const double alpha = dim == 2 ? 1.0 : 1.99;

    const auto st = estimate_state(y, u, D, alpha);
    const auto ad = estimate_adjoint(p, y, y_d);

    // Brute-force recomputation.
    const auto sides = oracle::sides_of(mesh);
    std::vector<double> nodal(space.n_dofs);
    for (int i = 0; i < space.n_dofs; ++i)
      nodal[i] = y.coeff[i] - y_d(mesh.vertices[i]);
    for (int t = 0; t < mesh.n_elements(); ++t) {
      const double h = oracle::h_of(mesh, t);
      double jump_sq = 0.0, jmax = 0.0;
      for (const auto& s : sides) {
        if (s.ta != t && s.tb != t) continue;
        const Point gy = oracle::grad_of(mesh, s.ta, y.coeff) -
                         oracle::grad_of(mesh, s.tb, y.coeff);
        const Point gp = oracle::grad_of(mesh, s.ta, p.coeff) -
                         oracle::grad_of(mesh, s.tb, p.coeff);
        jump_sq += dot(s.normal, gy) * dot(s.normal, gy) * s.measure;
        jmax = std::max(jmax, std::abs(dot(s.normal, gp)));
      }
      double ey = h * std::pow(oracle::DT_of(mesh, t, D.points), alpha) * jump_sq;
      for (size_t k = 0; k < D.points.size(); ++k) {
        const auto ev = mesh.element_vertices(t);
        const auto lam = barycentric(dim, std::span<const Point>(ev.data(), dim + 1),
                                     D.points[k]);
        bool inside = true;
        for (int i = 0; i <= dim; ++i)
          if (lam[i] < -1e-12) inside = false;
        if (inside) ey += std::pow(h, alpha + 2.0 - dim) * u[k] * u[k];
      }
      const double ep = std::pow(h, 2.0 - 0.5 * dim) *
                            std::sqrt(oracle::p1_l2sq(mesh, t, nodal)) +
                        h * jmax;
      const double scale_y = std::max(1.0, std::abs(st.ey_sq[t]));
      const double scale_p = std::max(1.0, std::abs(ad.value[t]));
      CHECK(std::abs(st.ey_sq[t] - ey) <= 1e-10 * scale_y);
      CHECK(std::abs(ad.value[t] - ep) <= 1e-10 * scale_p);
      ok = ok && std::abs(st.ey_sq[t] - ey) <= 1e-10 * scale_y &&
           std::abs(ad.value[t] - ep) <= 1e-10 * scale_p;
    }
  }

  // Oscillation against an exact barycentric-moment oracle (2d).
  {
    const auto mesh = uniform_refine(build_initial_mesh("unit_square"), 2);
    const auto g = [](const Point& x) {
      return x[0] * x[0] + 0.5 * x[0] * x[1] - x[1] + 0.25;
    };
    std::vector<int> all(mesh.n_elements());
    for (int t = 0; t < mesh.n_elements(); ++t) all[t] = t;
    const double module_value = oscillation(g, mesh, all);

    // Exact oracle: represent g on each element in barycentric monomials and
    // use int lam0^a lam1^b lam2^c = a! b! c! / (a+b+c+2)! * 2|T|.
    auto factorial = [](int n) {
      double f = 1.0;
      for (int k = 2; k <= n; ++k) f *= k;
      return f;
    };
    double total = 0.0;
    for (int t = 0; t < mesh.n_elements(); ++t) {
      const auto ev = mesh.element_vertices(t);
      const double vol = simplex_volume(2, std::span<const Point>(ev.data(), 3));
      // Quadratic g in barycentric coordinates: coefficients on the monomial
      // basis lam_i lam_j via nodal and edge-midpoint values.
      double node[3], edge[3][3];
      for (int i = 0; i < 3; ++i) node[i] = g(ev[i]);
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
          edge[i][j] = g(0.5 * (ev[i] + ev[j]));
      // g = sum_i node_i lam_i^2 + sum_{i<j} c_ij lam_i lam_j with
      // c_ij = 4 mid_ij - node_i - node_j (quadratic interpolation).
      auto moment = [&](int a0, int a1, int a2) {
        return factorial(a0) * factorial(a1) * factorial(a2) /
               factorial(a0 + a1 + a2 + 2) * 2.0 * vol;
      };
      // L2 projection onto linears: solve the 3x3 mass system exactly.
      // b_i = int g lam_i, all integrals degree-3 barycentric moments.
      double c01 = 4 * edge[0][1] - node[0] - node[1];
      double c02 = 4 * edge[0][2] - node[0] - node[2];
      double c12 = 4 * edge[1][2] - node[1] - node[2];
      auto int_g_times = [&](int i) {
        std::array<int, 3> e{0, 0, 0};
        e[i] = 1;
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
          std::array<int, 3> m{0, 0, 0};
          m[k] = 2;
          s += node[k] * moment(m[0] + e[0], m[1] + e[1], m[2] + e[2]);
        }
        s += c01 * moment(1 + e[0], 1 + e[1], e[2]);
        s += c02 * moment(1 + e[0], e[1], 1 + e[2]);
        s += c12 * moment(e[0], 1 + e[1], 1 + e[2]);
        return s;
      };
      const double b0 = int_g_times(0), b1 = int_g_times(1), b2 = int_g_times(2);
      // Mass matrix vol/12 (1 + delta); inverse of [[2,1,1],[1,2,1],[1,1,2]]
      // is (1/4)[[3,-1,-1],[-1,3,-1],[-1,-1,3]].
      const double f = 12.0 / vol / 4.0;
      const double p0 = f * (3 * b0 - b1 - b2);
      const double p1 = f * (-b0 + 3 * b1 - b2);
      const double p2 = f * (-b0 - b1 + 3 * b2);
      // || g - Pg ||^2 expanded with exact moments.
      double gg = 0.0;
      const double q[6] = {node[0], node[1], node[2], c01, c02, c12};
      const int qe[6][3] = {{2, 0, 0}, {0, 2, 0}, {0, 0, 2},
                            {1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
          gg += q[a] * q[b] * moment(qe[a][0] + qe[b][0], qe[a][1] + qe[b][1],
                                     qe[a][2] + qe[b][2]);
      double gp = p0 * int_g_times(0) + p1 * int_g_times(1) + p2 * int_g_times(2);
      const double pl[3] = {p0, p1, p2};
      double pp = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          std::array<int, 3> e{0, 0, 0};
          e[a] += 1;
          e[b] += 1;
          pp += pl[a] * pl[b] * moment(e[0], e[1], e[2]);
        }
      const double remainder = gg - 2.0 * gp + pp;
      const double h = oracle::h_of(mesh, t);
      total += h * h * std::max(0.0, remainder);
    }
    const double oracle_value = std::sqrt(total);
    CHECK(std::abs(module_value - oracle_value) <=
          1e-10 * std::max(1.0, oracle_value));
    ok = ok && std::abs(module_value - oracle_value) <=
                   1e-10 * std::max(1.0, oracle_value);
  }
  report(6, "estimator oracle equivalence", ok);
}

TEST_CASE("criterion 7: active-set oracle") {
  bool ok = true;
  const auto mesh2 = uniform_refine(build_initial_mesh("unit_square"), 2);

  struct Case {
    std::vector<Point> sources;
    std::vector<double> lower, upper;
    double lambda;
  };
  const std::vector<Case> cases = {
      {{{0.5, 0.5, 0}}, {0.0}, {0.02}, 0.01},
      {{{0.25, 0.25, 0}, {0.75, 0.75, 0}}, {-0.2, -0.2}, {0.3, 0.3}, 0.05},
      {{{0.25, 0.25, 0}, {0.75, 0.25, 0}, {0.5, 0.75, 0}},
       {-0.1, -0.1, -0.1},
       {0.2, 0.2, 0.2},
       0.02}};

  for (const auto& c : cases) {
    const int l = static_cast<int>(c.sources.size());
    OcpProblem problem;
    problem.sources.points = c.sources;
    problem.lower = c.lower;
    problem.upper = c.upper;
    problem.lambda = c.lambda;
    problem.weight_alpha = 1.0;
    problem.desired_state = [](const Point& x) { return x[0] + 0.5 * x[1]; };

    const auto mesh = ensure_source_separation(mesh2, problem.sources);
    const auto space = make_p1_space(mesh);
    const auto op = reduced_operator(space, problem);
    const auto sol = solve_active_set(problem, space);

    // Plain grid enumeration of the reduced quadratic over the box.
    const double step = 1e-3;
    std::vector<double> best(l, 0.0);
    double best_q = 1e300;
    std::vector<int> steps(l);
    for (int k = 0; k < l; ++k)
      steps[k] = static_cast<int>(std::round((c.upper[k] - c.lower[k]) / step));
    auto G = [&](int j, int k) { return 0.5 * (op.G[j][k] + op.G[k][j]); };
    if (l == 1) {
      for (int i0 = 0; i0 <= steps[0]; ++i0) {
        const double u0 = c.lower[0] + i0 * step;
        const double q = 0.5 * (c.lambda + G(0, 0)) * u0 * u0 + op.offset[0] * u0;
        if (q < best_q) {
          best_q = q;
          best = {u0};
        }
      }
    } else if (l == 2) {
      for (int i0 = 0; i0 <= steps[0]; ++i0) {
        const double u0 = c.lower[0] + i0 * step;
        const double a0 = 0.5 * (c.lambda + G(0, 0)) * u0 * u0 + op.offset[0] * u0;
        const double b1 = op.offset[1] + G(0, 1) * u0;
        const double a2 = 0.5 * (c.lambda + G(1, 1));
        for (int i1 = 0; i1 <= steps[1]; ++i1) {
          const double u1 = c.lower[1] + i1 * step;
          const double q = a0 + u1 * (b1 + a2 * u1);
          if (q < best_q) {
            best_q = q;
            best = {u0, u1};
          }
        }
      }
    } else {
      for (int i0 = 0; i0 <= steps[0]; ++i0) {
        const double u0 = c.lower[0] + i0 * step;
        for (int i1 = 0; i1 <= steps[1]; ++i1) {
          const double u1 = c.lower[1] + i1 * step;
          const double base = 0.5 * (c.lambda + G(0, 0)) * u0 * u0 +
                              op.offset[0] * u0 + G(0, 1) * u0 * u1 +
                              0.5 * (c.lambda + G(1, 1)) * u1 * u1 +
                              op.offset[1] * u1;
          const double lin = op.offset[2] + G(0, 2) * u0 + G(1, 2) * u1;
          const double quad = 0.5 * (c.lambda + G(2, 2));
          for (int i2 = 0; i2 <= steps[2]; ++i2) {
            const double u2 = c.lower[2] + i2 * step;
            const double q = base + u2 * (lin + quad * u2);
            if (q < best_q) {
              best_q = q;
              best = {u0, u1, u2};
            }
          }
        }
      }
    }
    for (int k = 0; k < l; ++k) {
      CHECK(std::abs(sol.u[k] - best[k]) <= 2e-3);
      ok = ok && std::abs(sol.u[k] - best[k]) <= 2e-3;
    }
  }
  report(7, "active-set oracle", ok);
}

TEST_CASE("criterion 8: manufactured-data consistency") {
  bool ok = true;
  auto fd_lap = [](const ScalarField& f, const Point& x, int dim, double h) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      auto at = [&](double off) {
        Point y = x;
        y[k] += off;
        return f(y);
      };
      s += (-at(2 * h) + 16 * at(h) - 30 * at(0) + 16 * at(-h) - at(-2 * h)) /
           (12 * h * h);
    }
    return s;
  };
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const char* name : {"example2", "example3", "example5"}) {
    const auto ep = preset(name);
    const auto& mc = *ep.exact;
    // Projection-formula identity is exact by construction.
    for (size_t k = 0; k < mc.exact_control.size(); ++k) {
      const double raw =
          -mc.exact_adjoint(ep.problem.sources.points[k]) / ep.problem.lambda;
      const double proj =
          std::max(ep.problem.lower[k], std::min(ep.problem.upper[k], raw));
      CHECK(mc.exact_control[k] == proj);
      ok = ok && mc.exact_control[k] == proj;
    }
    int tested = 0;
    while (tested < 100) {
      Point x{0, 0, 0};
      if (ep.domain == "lshape2d") {
        x = {2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0, 0.0};
        if (x[0] > -0.05 && x[1] < 0.05) continue;  // removed quadrant + margin
        if (std::max(std::abs(x[0]), std::abs(x[1])) > 0.92) continue;
        if (std::hypot(x[0], x[1]) < 0.08) continue;
      } else {
        for (int k = 0; k < ep.dim; ++k) x[k] = 0.06 + 0.88 * unif(rng);
      }
      double dmin = 1e300;
      for (const auto& z : ep.problem.sources.points)
        dmin = std::min(dmin, distance(x, z));
      if (dmin < 0.08) continue;
      const double h = ep.domain == "lshape2d"
                           ? 2e-3 * std::min(dmin, std::hypot(x[0], x[1]))
                           : 1e-3;
      const double lhs = -fd_lap(mc.exact_adjoint, x, ep.dim, h);
      const double rhs = mc.exact_state(x) - mc.desired_state(x);
      const double scale = std::max({1.0, std::abs(rhs)});
      CHECK(std::abs(lhs - rhs) <= 1e-6 * scale);
      ok = ok && std::abs(lhs - rhs) <= 1e-6 * scale;
      ++tested;
    }
  }
  report(8, "manufactured-data consistency", ok);
}

TEST_CASE("criterion 9: standalone pointwise estimator") {
  bool ok = true;
  const Point center{0.5, 0.5, 0.0};
  const ScalarField f = [center](const Point& x) {
    const double r = distance(x, center);
    return std::pow(r, -0.5);  // unbounded but in L^2
  };
  auto poisson_solve = [&](const SimplicialMesh& mesh, const P1Space& space) {
    const auto A = assemble_stiffness(space);
    auto rhs = assemble_l2_load(space, f, 6);
    apply_dirichlet(A, rhs, space, {});
    FeFunction u{&space, {}};
    solve_spd(A, rhs, space, u.coeff, 1e-12);
    return u;
  };

  auto mesh = uniform_refine(build_initial_mesh("unit_square"), 2);
  std::vector<double> globals;
  SimplicialMesh eff_mesh;
  for (int step = 0; step <= 6; ++step) {
    const auto space = make_p1_space(mesh);
    const auto u = poisson_solve(mesh, space);
    const auto ind = estimate_poisson_max(u, f, 6);
    globals.push_back(ind.global);
    if (step == 4) eff_mesh = mesh;
    if (step < 6) mesh = uniform_refine(mesh, 1);
  }
  std::printf("  E_inf along uniform refinements:");
  for (double g : globals) std::printf(" %.4f", g);
  std::printf("\n");
  for (size_t i = 1; i < globals.size(); ++i) {
    CHECK(globals[i] < globals[i - 1]);
    ok = ok && globals[i] < globals[i - 1];
  }

  // Per-element efficiency against a reference solve on a twice-refined mesh.
  {
    const auto space = make_p1_space(eff_mesh);
    const auto u = poisson_solve(eff_mesh, space);
    const auto ind = estimate_poisson_max(u, f, 6);
    const auto fine = uniform_refine(eff_mesh, 2);
    const auto fine_space = make_p1_space(fine);
    const auto u_ref = poisson_solve(fine, fine_space);

    double worst = 0.0;
    for (int t = 0; t < eff_mesh.n_elements(); ++t) {
      const auto star = patch_star(eff_mesh, t);
      double err_inf = 0.0;
      for (int s : star) {
        const auto ev = eff_mesh.element_vertices(s);
        for (int a = 0; a <= 4; ++a)
          for (int b = 0; a + b <= 4; ++b) {
            const double l1 = a / 4.0, l2 = b / 4.0;
            const Point x =
                (1.0 - l1 - l2) * ev[0] + l1 * ev[1] + l2 * ev[2];
            FeFunction utmp = u;
            const double coarse_val = utmp.evaluate_in(s, x);
            const double fine_val = evaluate(u_ref, x);
            err_inf = std::max(err_inf, std::abs(fine_val - coarse_val));
          }
      }
      const double osc = oscillation(f, eff_mesh, star);
      const double ratio = ind.value[t] / (err_inf + osc);
      worst = std::max(worst, ratio);
    }
    std::printf("  worst local efficiency ratio: %.3f\n", worst);
    CHECK(worst < 100.0);
    ok = ok && worst < 100.0;
  }
  report(9, "standalone pointwise estimator", ok);
}

TEST_CASE("criterion 10: determinism") {
  RunConfig config;
  config.preset = "example2";
  config.max_ndof = 4000;
  std::ostringstream a, b;
  REQUIRE(run_experiment(config, a) == 0);
  REQUIRE(run_experiment(config, b) == 0);
  const bool ok = a.str() == b.str() && !a.str().empty();
  CHECK(ok);
  report(10, "determinism", ok);
}
