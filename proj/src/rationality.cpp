#include "fr/rationality.hpp"

#include <algorithm>

namespace fr {

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::rationality_j: return "rationality_J";
    case TestKind::symmetry_j: return "symmetry_J";
    case TestKind::symmetry_t: return "symmetry_t";
  }
  return "unknown";
}

TestReport j_rationality(const GmmFit& fit) {
  TestReport r;
  r.kind = TestKind::rationality_j;
  r.d = fit.d;
  r.T = fit.T;
  if (fit.d <= 1) {
    r.exactly_identified = true;
    return r;
  }
  const VectorXd g = gbar(fit.aggregates, fit.alpha_hat);
  r.statistic = std::max(0.0, static_cast<double>(fit.T) * inv_quad_form(fit.aggregates.s, g));
  r.df = static_cast<int>(fit.d - 1);
  r.p_value = chi2_sf(r.statistic, r.df);
  return r;
}

TestReport j_symmetry(const GmmFit& fit) {
  TestReport r;
  r.kind = TestKind::symmetry_j;
  r.d = fit.d;
  r.T = fit.T;
  const VectorXd g = gbar(fit.aggregates, 0.5);
  r.statistic = std::max(0.0, static_cast<double>(fit.T) * inv_quad_form(fit.aggregates.s, g));
  r.df = static_cast<int>(fit.d);
  r.p_value = chi2_sf(r.statistic, r.df);
  return r;
}

TestReport t_symmetry(double alpha, double se, Index d, Index T) {
  if (!(se > 0.0)) throw DegenerateMoments("t_symmetry: standard error must be positive");
  TestReport r;
  r.kind = TestKind::symmetry_t;
  r.d = d;
  r.T = T;
  r.statistic = (alpha - 0.5) / se;
  r.p_value = normal_two_sided_p(r.statistic);
  return r;
}

TestReport t_symmetry(const GmmFit& fit) { return t_symmetry(fit.alpha_hat, fit.se, fit.d, fit.T); }

}  // namespace fr
