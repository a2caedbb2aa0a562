#pragma once

#include <functional>
#include <optional>
#include <span>

#include "ocplab/estimators.hpp"
#include "ocplab/manufactured.hpp"
#include "ocplab/ocp_solver.hpp"

namespace ocplab {

// One row of a SOLVE -> ESTIMATE -> MARK -> REFINE run. Ndof counts state
// plus adjoint plus control unknowns. Error fields are present only when a
// manufactured case drives the run.
struct AfemRecord {
  int iteration = 0;
  long long ndof = 0;
  int n_elements = 0;
  double ey = 0.0;
  double ep = 0.0;
  double eocp = 0.0;
  double log_factor = 0.0;
  std::optional<double> err_y, err_p, err_u, err_total, effectivity;
  double vi_residual = 0.0;
  double solver_residual = 0.0;
  int active_set_iterations = 0;
};

struct StopRule {
  std::optional<long long> max_ndof;
  std::optional<int> max_iter;
  std::optional<double> estimator_tol;

  bool satisfied(const AfemRecord& r) const {
    if (max_ndof && r.ndof >= *max_ndof) return true;
    if (max_iter && r.iteration >= *max_iter) return true;
    if (estimator_tol && r.eocp <= *estimator_tol) return true;
    return false;
  }
};

struct AfemOptions {
  double theta = 0.5;
  SolverOptions solver;
  int estimator_quad_degree = 6;
  int graded_depth = 12;
};

// Maximum marking: elements with combined indicator above theta times the
// largest one, with the maximizers always included.
std::vector<int> mark(std::span<const double> combined, double theta);

class AfemFailure : public std::runtime_error {
 public:
  AfemFailure(const std::string& what, std::vector<AfemRecord> partial, int at)
      : std::runtime_error(what), records(std::move(partial)), failed_iteration(at) {}
  std::vector<AfemRecord> records;
  int failed_iteration;
};

std::vector<AfemRecord> run_afem(
    const OcpProblem& problem, const SimplicialMesh& seed, const StopRule& stop,
    const ManufacturedCase* exact = nullptr, const AfemOptions& opts = {},
    const std::function<void(const AfemRecord&)>& on_record = {},
    SimplicialMesh* final_mesh = nullptr);

// Least-squares slope of log(value) against log(ndof) over the last `window`
// records.
double fit_rate(std::span<const double> ndof, std::span<const double> value,
                int window);

}  // namespace ocplab
