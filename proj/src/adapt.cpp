#include "ocplab/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ocplab/weights.hpp"

namespace ocplab {

std::vector<int> mark(std::span<const double> combined, double theta) {
  if (combined.empty()) throw std::invalid_argument("mark: empty indicator field");
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("mark: theta outside (0, 1)");
  const double maxval = *std::max_element(combined.begin(), combined.end());
  std::vector<int> marked;
  if (maxval <= 0.0) return marked;  // converged: nothing to mark
  const double threshold = theta * maxval;
  for (size_t t = 0; t < combined.size(); ++t)
    if (combined[t] > threshold || combined[t] == maxval)
      marked.push_back(static_cast<int>(t));
  return marked;
}

std::vector<AfemRecord> run_afem(const OcpProblem& problem,
                                 const SimplicialMesh& seed, const StopRule& stop,
                                 const ManufacturedCase* exact,
                                 const AfemOptions& opts,
                                 const std::function<void(const AfemRecord&)>& on_record,
                                 SimplicialMesh* final_mesh) {
  SimplicialMesh mesh = ensure_source_separation(seed, problem.sources);
  std::vector<AfemRecord> records;
  std::vector<double> warm_u;
  ReducedWarmStart warm;
  bool have_warm = false;

  for (int iteration = 0;; ++iteration) {
    try {
      const P1Space space = make_p1_space(mesh);
      ReducedOperator op;
      const OcpSolution sol =
          solve_active_set(problem, space, opts.solver, iteration > 0 ? &warm_u : nullptr,
                           have_warm ? &warm : nullptr, &op);

      const auto sides = interior_sides(mesh);
      const StateIndicators state_ind = estimate_state(
          sol.y, sol.u, problem.sources, problem.weight_alpha, &sides);
      const MaxNormIndicators adjoint_ind = estimate_adjoint(
          sol.p, sol.y, problem.desired_state, opts.estimator_quad_degree, &sides);
      const IndicatorField ind = combine_indicators(mesh, state_ind, adjoint_ind);

      AfemRecord rec;
      rec.iteration = iteration;
      rec.ndof = 2LL * space.n_free + problem.sources.size();
      rec.n_elements = mesh.n_elements();
      rec.ey = ind.ey_global;
      rec.ep = ind.ep_global;
      rec.eocp = ind.eocp_global;
      rec.log_factor = ind.log_factor;
      rec.vi_residual = vi_residual(sol, problem);
      rec.solver_residual = sol.max_rel_residual;
      rec.active_set_iterations = sol.iterations;
      if (exact) {
        const WeightSpec spec =
            make_weight_spec(mesh, problem.sources, problem.weight_alpha);
        const ExactErrors err = exact_errors(sol, *exact, spec, opts.graded_depth,
                                             opts.estimator_quad_degree);
        rec.err_y = err.err_y;
        rec.err_p = err.err_p;
        rec.err_u = err.err_u;
        rec.err_total = err.err_total;
        if (err.err_total > 0.0) rec.effectivity = rec.eocp / err.err_total;
      }
      records.push_back(rec);
      if (on_record) on_record(rec);

      if (stop.satisfied(rec)) break;
      const std::vector<int> marked = mark(ind.combined, opts.theta);
      if (marked.empty()) break;  // all indicators vanished

      const SimplicialMesh refined = refine(mesh, marked);
      warm_u = sol.u;
      warm.y_affine = prolongate(refined, op.y_affine);
      warm.p_affine = prolongate(refined, op.p_affine);
      warm.y_unit.clear();
      warm.p_unit.clear();
      for (const auto& v : op.y_unit) warm.y_unit.push_back(prolongate(refined, v));
      for (const auto& v : op.p_unit) warm.p_unit.push_back(prolongate(refined, v));
      have_warm = true;
      mesh = refined;
    } catch (const SolverFailure& e) {
      throw AfemFailure(std::string("run_afem: ") + e.what(), records, iteration);
    } catch (const ActiveSetFailure& e) {
      throw AfemFailure(std::string("run_afem: ") + e.what(), records, iteration);
    }
  }
  if (final_mesh) *final_mesh = mesh;
  return records;
}

double fit_rate(std::span<const double> ndof, std::span<const double> value,
                int window) {
  if (window < 3) throw std::invalid_argument("fit_rate: window must be >= 3");
  if (static_cast<int>(ndof.size()) < window || ndof.size() != value.size())
    throw std::invalid_argument("fit_rate: not enough records in the window");
  const size_t begin = ndof.size() - window;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = begin; i < ndof.size(); ++i) {
    if (!(ndof[i] > 0.0) || !(value[i] > 0.0))
      throw std::invalid_argument("fit_rate: nonpositive data in the window");
    const double x = std::log(ndof[i]);
    const double y = std::log(value[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(window);
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace ocplab
