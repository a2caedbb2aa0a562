#include "ocplab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace ocplab {

namespace {

// Enumerate all beta in N_0^parts with |beta| = total.
void enumerate_compositions(int total, int parts,
                            std::vector<std::vector<int>>& out) {
  std::vector<int> cur(parts, 0);
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == parts - 1) {
      cur[pos] = remaining;
      out.push_back(cur);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      cur[pos] = k;
      self(self, pos + 1, remaining - k);
    }
  };
  rec(rec, 0, total);
}

QuadRule make_gm_rule(int dim, int degree) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("simplex_rule: dim must be 2 or 3");
  if (degree < 1) throw std::invalid_argument("simplex_rule: degree must be positive");
  const int s = degree / 2;  // smallest s with 2s+1 >= degree
  const int d = 2 * s + 1;

  QuadRule rule;
  rule.dim = dim;
  rule.degree = d;
  double wsum = 0.0;
  for (int i = 0; i <= s; ++i) {
    const double denom = d + dim - 2 * i;
    double w = std::pow(2.0, -2.0 * s) * std::pow(denom, d) /
               (std::tgamma(i + 1.0) * std::tgamma(d + dim - i + 1.0));
    if (i % 2 == 1) w = -w;
    std::vector<std::vector<int>> betas;
    enumerate_compositions(s - i, dim + 1, betas);
    for (const auto& beta : betas) {
      std::array<double, 4> lam{0.0, 0.0, 0.0, 0.0};
      for (int k = 0; k <= dim; ++k) lam[k] = (2.0 * beta[k] + 1.0) / denom;
      rule.bary.push_back(lam);
      rule.weights.push_back(w);
      wsum += w;
    }
  }
  // Normalize so that constants integrate exactly.
  for (double& w : rule.weights) w /= wsum;
  return rule;
}

}  // namespace

const QuadRule& simplex_rule(int dim, int degree) {
  static std::map<std::pair<int, int>, QuadRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(dim, degree);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make_gm_rule(dim, degree)).first;
  return it->second;
}

}  // namespace ocplab
