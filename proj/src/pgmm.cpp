#include "fr/pgmm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fr {

namespace {

constexpr double kTinyBeta = 1e-12;

std::vector<Index> concat(const std::vector<Index>& a, const std::vector<Index>& b) {
  std::vector<Index> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// d x (1 + m): column 0 is B, column 1 + l is the unit vector at doubt l.
MatrixXd design(const VectorXd& b, const std::vector<Index>& doubt) {
  const Index d = b.size();
  const Index m = static_cast<Index>(doubt.size());
  MatrixXd x = MatrixXd::Zero(d, 1 + m);
  x.col(0) = b;
  for (Index l = 0; l < m; ++l) x(doubt[static_cast<std::size_t>(l)], 1 + l) = 1.0;
  return x;
}

}  // namespace

// ---- configuration -------------------------------------------------------

void MomentPartition::validate(Index d) const {
  if (good.empty()) throw ConfigError("partition: the good set must contain at least one column");
  std::set<Index> seen;
  for (Index j : concat(good, doubt)) {
    if (j < 0 || j >= d) throw ConfigError("partition: column index out of range");
    if (!seen.insert(j).second) throw ConfigError("partition: good and doubt sets overlap");
  }
}

MomentPartition MomentPartition::from_names(const ForecastSample& sample,
                                            const std::vector<std::string>& good,
                                            const std::vector<std::string>& doubt) {
  MomentPartition part;
  part.good = sample.columns(good);
  if (doubt.empty()) {
    const std::set<Index> g(part.good.begin(), part.good.end());
    for (Index j = 0; j < sample.dim(); ++j) {
      if (!g.count(j)) part.doubt.push_back(j);
    }
  } else {
    part.doubt = sample.columns(doubt);
  }
  part.validate(sample.dim());
  return part;
}

std::string to_string(TuningRow row) { return row == TuningRow::inv_sqrt ? "inv_sqrt" : "inverse"; }

TuningRow parse_tuning_row(std::string_view text) {
  if (text == "inv_sqrt") return TuningRow::inv_sqrt;
  if (text == "inverse") return TuningRow::inverse;
  throw ConfigError("unknown tuning row '" + std::string(text) + "' (inv_sqrt or inverse)");
}

void PgmmConfig::validate() const {
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw ConfigError("r1 and r2 must be positive");
  if (r2 > r1) throw ConfigError("r2 must not exceed r1");
  if (p != 1 && p != 2) throw ConfigError("p must be 1 or 2");
  if (!(cd_tol > 0.0) || !(zero_tol > 0.0) || !(gmm_tol > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (cd_max_iter < 1 || gmm_max_iter < 1) throw ConfigError("iteration limits must be >= 1");
}

// ---- stages ---------------------------------------------------------------

PreliminaryFit preliminary_fit(const ForecastSample& sample, const MomentPartition& part,
                               const PgmmConfig& cfg) {
  cfg.validate();
  part.validate(sample.dim());
  const Index d = sample.dim();
  const MomentAggregates base = aggregates(sample, 0.5, WeightingMode::identity, cfg.p);

  PreliminaryFit pre;
  if (cfg.weighting == WeightingMode::identity) {
    pre.w = MatrixXd::Identity(d, d);
  } else {
    const GmmFit good_fit = fit_iterated(sample.select(part.good), cfg.gmm_options());
    pre.w = inverse_spd(aggregates(sample, good_fit.alpha_hat, WeightingMode::efficient, cfg.p).s);
  }

  const MatrixXd x = design(base.b, part.doubt);
  const MatrixXd h = x.transpose() * pre.w * x;
  const VectorXd rhs = x.transpose() * pre.w * base.c;
  MatrixXd l;
  try {
    l = cholesky(h);
  } catch (const NotPositiveDefinite&) {
    throw DegenerateMoments("preliminary fit: the good set does not identify alpha");
  }
  const VectorXd theta = l.transpose().triangularView<Eigen::Upper>().solve(
      l.triangularView<Eigen::Lower>().solve(rhs));
  pre.alpha_dot = theta(0);
  pre.beta_dot = theta.tail(theta.size() - 1);
  pre.aggregates = aggregates(sample, pre.alpha_dot, WeightingMode::efficient, cfg.p);
  return pre;
}

VectorXd relevance(const ForecastSample& sample, const MomentPartition& part, double alpha_dot,
                   const PgmmConfig& cfg, std::vector<bool>* failed) {
  part.validate(sample.dim());
  const MomentAggregates eff =
      aggregates(sample, alpha_dot, WeightingMode::efficient, cfg.p, /*check_spd=*/false);
  double base = 0.0;
  try {
    base = information(restrict(eff, part.good));
  } catch (const NotPositiveDefinite&) {
    throw SingularWeighting("relevance: weighting block of the good set is singular");
  }
  const Index m = static_cast<Index>(part.doubt.size());
  VectorXd mu = VectorXd::Zero(m);
  if (failed) failed->assign(static_cast<std::size_t>(m), false);
  std::vector<Index> idx = part.good;
  idx.push_back(0);
  for (Index l = 0; l < m; ++l) {
    idx.back() = part.doubt[static_cast<std::size_t>(l)];
    try {
      mu(l) = information(restrict(eff, idx)) - base;
    } catch (const NotPositiveDefinite&) {
      if (failed) (*failed)[static_cast<std::size_t>(l)] = true;
    }
  }
  return mu;
}

VectorXd adaptive_weights(const VectorXd& mu, const VectorXd& beta_dot, const PgmmConfig& cfg) {
  if (mu.size() != beta_dot.size()) throw ConfigError("adaptive_weights: size mismatch");
  VectorXd omega(mu.size());
  for (Index l = 0; l < mu.size(); ++l) {
    const double b = std::abs(beta_dot(l));
    omega(l) = b < kTinyBeta ? kInfinitePenalty
                             : std::pow(std::max(mu(l), 0.0), cfg.r1) * std::pow(b, -cfg.r2);
  }
  return omega;
}

MatrixXd tuning_projector(const VectorXd& b, const MatrixXd& s) {
  const Index d = b.size();
  const MatrixXd r = inv_sqrt_spd(s);
  const double gsg = inv_quad_form(s, b);
  if (!(gsg > 1e-14)) throw DegenerateMoments("tuning: B'S^-1 B <= 1e-14");
  // Gamma = -B; the two sign flips cancel.
  const VectorXd rg = r * b;
  MatrixXd pi = MatrixXd::Identity(d, d) - rg * rg.transpose() / gsg;
  return (pi + pi.transpose()) / 2.0;
}

VectorXd tuning(const ForecastSample& sample, const MomentPartition& part, double alpha_dot,
                const PgmmConfig& cfg) {
  part.validate(sample.dim());
  const Index d = sample.dim();
  const double T = static_cast<double>(sample.size());
  const MomentAggregates agg = aggregates(sample, alpha_dot, cfg.weighting, cfg.p);
  const MatrixXd pi = tuning_projector(agg.b, agg.s);
  const MatrixXd rows = cfg.tuning_row == TuningRow::inv_sqrt ? inv_sqrt_spd(agg.s) : inverse_spd(agg.s);
  const double scale = 2.0 * std::pow(static_cast<double>(d), cfg.r2 / 4.0) *
                       std::pow(T, -0.5 - cfg.r2 / 4.0);
  const Index m = static_cast<Index>(part.doubt.size());
  VectorXd lambda(m);
  for (Index l = 0; l < m; ++l) {
    lambda(l) = scale * (rows.row(part.doubt[static_cast<std::size_t>(l)]) * pi).norm();
  }
  return lambda;
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

// ---- coordinate descent ---------------------------------------------------

double penalized_objective(const PenalizedProblem& prob, double alpha, const VectorXd& beta) {
  VectorXd theta(1 + beta.size());
  theta << alpha, beta;
  const VectorXd r = prob.c - prob.x * theta;
  double f = r.dot(prob.w * r);
  for (Index l = 0; l < beta.size(); ++l) {
    if (beta(l) != 0.0) f += prob.penalty(l) * std::abs(beta(l));
  }
  return f;
}

PenalizedSolution coordinate_descent(const PenalizedProblem& prob, const PgmmConfig& cfg) {
  const Index n = prob.x.cols();
  const Index m = n - 1;
  if (prob.penalty.size() != m || prob.start.size() != n || prob.c.size() != prob.x.rows()) {
    throw ConfigError("coordinate_descent: dimension mismatch");
  }
  for (Index l = 0; l < m; ++l) {
    if (!(prob.penalty(l) >= 0.0)) throw ConfigError("coordinate_descent: penalties must be >= 0");
  }
  const MatrixXd h = prob.x.transpose() * prob.w * prob.x;
  const VectorXd hc = prob.x.transpose() * prob.w * prob.c;
  for (Index j = 0; j < n; ++j) {
    if (!(h(j, j) > 0.0)) throw DegenerateMoments("coordinate_descent: zero curvature coordinate");
  }

  VectorXd theta = prob.start;
  for (Index l = 0; l < m; ++l) {
    if (std::isinf(prob.penalty(l))) theta(1 + l) = 0.0;
  }

  PenalizedSolution sol;
  sol.objective_trace.push_back(penalized_objective(prob, theta(0), theta.tail(m)));
  for (int sweep = 1; sweep <= cfg.cd_max_iter; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double r = hc(j) - h.row(j).dot(theta) + h(j, j) * theta(j);
      double next;
      if (j == 0) {
        next = r / h(0, 0);
      } else if (std::isinf(prob.penalty(j - 1))) {
        next = 0.0;
      } else {
        next = soft_threshold(r, prob.penalty(j - 1) / 2.0) / h(j, j);
      }
      max_change = std::max(max_change, std::abs(next - theta(j)));
      theta(j) = next;
    }
    sol.sweeps = sweep;
    sol.objective_trace.push_back(penalized_objective(prob, theta(0), theta.tail(m)));
    if (max_change < cfg.cd_tol) {
      sol.converged = true;
      break;
    }
  }

  // Snap float dust to exact zeros, then re-solve alpha given beta.
  bool snapped = false;
  for (Index l = 0; l < m; ++l) {
    if (theta(1 + l) != 0.0 && std::abs(theta(1 + l)) < cfg.zero_tol) {
      theta(1 + l) = 0.0;
      snapped = true;
    }
  }
  if (snapped) theta(0) = (hc(0) - h.row(0).tail(m).dot(theta.tail(m))) / h(0, 0);

  sol.alpha = theta(0);
  sol.beta = theta.tail(m);
  return sol;
}

// ---- pipeline -------------------------------------------------------------

PgmmResult solve_penalized(const ForecastSample& sample, const MomentPartition& part,
                           const PgmmConfig& cfg) {
  PgmmResult res;
  res.partition = part;
  res.preliminary = preliminary_fit(sample, part, cfg);
  const double alpha_dot = res.preliminary.alpha_dot;
  res.mu_dot = relevance(sample, part, alpha_dot, cfg, &res.mu_failed);
  res.omega = adaptive_weights(res.mu_dot, res.preliminary.beta_dot, cfg);
  res.lambda = tuning(sample, part, alpha_dot, cfg);

  const MomentAggregates& agg = res.preliminary.aggregates;
  res.problem.x = design(agg.b, part.doubt);
  res.problem.c = agg.c;
  res.problem.w = res.preliminary.w;
  res.problem.penalty.resize(res.omega.size());
  for (Index l = 0; l < res.omega.size(); ++l) {
    res.problem.penalty(l) = std::isinf(res.omega(l)) ? kInfinitePenalty : res.lambda(l) * res.omega(l);
  }
  res.problem.start.resize(1 + res.omega.size());
  res.problem.start << alpha_dot, res.preliminary.beta_dot;

  res.solution = coordinate_descent(res.problem, cfg);
  res.alpha_hat = res.solution.alpha;
  res.beta_hat = res.solution.beta;
  return res;
}

void classify_and_refit(PgmmResult& res, const ForecastSample& sample, const PgmmConfig& cfg) {
  const auto& doubt = res.partition.doubt;
  res.selected.clear();
  res.excluded.clear();
  res.diagnostics.clear();
  const MomentAggregates& eff = res.preliminary.aggregates;
  const double root_t = std::sqrt(static_cast<double>(sample.size()));
  for (std::size_t l = 0; l < doubt.size(); ++l) {
    const Index li = static_cast<Index>(l);
    if (res.beta_hat(li) == 0.0) {
      res.selected.push_back(doubt[l]);
      continue;
    }
    res.excluded.push_back(doubt[l]);
    ExclusionDiagnostic diag;
    diag.column = doubt[l];
    diag.beta_dot = res.preliminary.beta_dot(li);
    diag.mu_dot = res.mu_dot(li);
    diag.z = std::abs(diag.beta_dot) * root_t / std::sqrt(eff.s(doubt[l], doubt[l]));
    diag.label = diag.z > 3.0 ? "likely_invalid" : "likely_irrelevant";
    res.diagnostics.push_back(diag);
  }
  const std::vector<Index> cols = concat(res.partition.good, res.selected);
  res.post_fit = fit_iterated(sample.select(cols), cfg.gmm_options());
  res.refitted = true;
}

PgmmResult run_pgmm(const ForecastSample& sample, const MomentPartition& part,
                    const PgmmConfig& cfg) {
  PgmmResult res = solve_penalized(sample, part, cfg);
  classify_and_refit(res, sample, cfg);
  return res;
}

}  // namespace fr
