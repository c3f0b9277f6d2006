#include "fr/gmm.hpp"

#include <algorithm>
#include <cmath>

namespace fr {

namespace {

constexpr double kDegenerate = 1e-14;
constexpr double kReportLo = 1e-6;
constexpr double kReportHi = 1.0 - 1e-6;

}  // namespace

double information(const MomentAggregates& agg) {
  if (agg.weighting == WeightingMode::identity) return agg.b.squaredNorm();
  return inv_quad_form(agg.s, agg.b);
}

double fit_closed_form(const VectorXd& b, const VectorXd& c, const MatrixXd& s) {
  if (b.size() != c.size() || s.rows() != b.size()) {
    throw ConfigError("fit_closed_form: dimension mismatch");
  }
  const MatrixXd l = cholesky(s);
  const VectorXd lb = l.triangularView<Eigen::Lower>().solve(b);
  const VectorXd lc = l.triangularView<Eigen::Lower>().solve(c);
  const double bsb = lb.squaredNorm();
  if (!(bsb > kDegenerate)) {
    throw DegenerateMoments("B'S^-1 B <= 1e-14: the instruments carry no information about alpha");
  }
  return lb.dot(lc) / bsb;
}

double fit_closed_form(const ForecastSample& sample, const MatrixXd& s, int p) {
  const MomentAggregates agg = aggregates(sample, 0.5, WeightingMode::identity, p);
  return fit_closed_form(agg.b, agg.c, s);
}

double objective(const MomentAggregates& agg, double alpha) {
  const VectorXd g = gbar(agg, alpha);
  if (agg.weighting == WeightingMode::identity) return g.squaredNorm();
  return inv_quad_form(agg.s, g);
}

double std_error(const MomentAggregates& efficient) {
  const double info = inv_quad_form(efficient.s, efficient.b);
  if (!(info > kDegenerate)) throw DegenerateMoments("std_error: B'S^-1 B <= 1e-14");
  return std::sqrt(1.0 / info / static_cast<double>(efficient.T));
}

double std_error(const GmmFit& fit) { return std_error(fit.aggregates); }

GmmFit fit_iterated(const ForecastSample& sample, const GmmOptions& opts) {
  if (!(opts.tol > 0.0)) throw ConfigError("fit_iterated: tol must be positive");
  if (opts.max_iter < 1) throw ConfigError("fit_iterated: max_iter must be >= 1");

  const MomentAggregates base = aggregates(sample, 0.5, WeightingMode::identity, opts.p);
  const Index d = base.dim();

  GmmFit fit;
  fit.d = d;
  fit.T = sample.size();
  fit.p = opts.p;
  fit.weighting = opts.weighting;

  double alpha = fit_closed_form(base.b, base.c, MatrixXd::Identity(d, d));
  fit.iterations = 1;
  fit.converged = true;

  if (opts.weighting == WeightingMode::efficient) {
    fit.converged = false;
    for (int k = 1; k <= opts.max_iter; ++k) {
      const MomentAggregates eff = aggregates(sample, alpha, WeightingMode::efficient, opts.p);
      const double next = fit_closed_form(eff.b, eff.c, eff.s);
      fit.iterations = k;
      const double step = std::abs(next - alpha);
      alpha = next;
      if (step < opts.tol) {
        fit.converged = true;
        break;
      }
    }
  }

  fit.alpha_hat = alpha;
  fit.alpha_reported = std::clamp(alpha, kReportLo, kReportHi);
  fit.clamped = fit.alpha_reported != alpha;
  fit.aggregates = aggregates(sample, alpha, WeightingMode::efficient, opts.p);
  fit.se = std_error(fit.aggregates);
  fit.q_min = opts.weighting == WeightingMode::efficient ? objective(fit.aggregates, alpha)
                                                         : objective(base, alpha);
  return fit;
}

}  // namespace fr
