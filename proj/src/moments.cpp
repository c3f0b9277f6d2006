#include "fr/moments.hpp"

#include <cmath>
#include <set>

namespace fr {

LossSpec::LossSpec(int p_, double alpha_) : p(p_), alpha(alpha_) {
  if (p != 1 && p != 2) throw DomainError("LossSpec: p must be 1 or 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("LossSpec: alpha must lie in (0, 1)");
}

std::string to_string(WeightingMode mode) {
  return mode == WeightingMode::identity ? "identity" : "efficient";
}

WeightingMode parse_weighting(std::string_view text) {
  if (text == "identity") return WeightingMode::identity;
  if (text == "efficient") return WeightingMode::efficient;
  throw ConfigError("unknown weighting mode '" + std::string(text) + "'");
}

double loss_value(double e, const LossSpec& spec) {
  const double ind = e < 0.0 ? 1.0 : 0.0;
  return (spec.alpha + (1.0 - 2.0 * spec.alpha) * ind) * std::pow(std::abs(e), spec.p);
}

double generalized_error(double e, int p) {
  if (p == 1) return 1.0;
  if (p == 2) return std::abs(e);
  return std::pow(std::abs(e), p - 1);
}

// ---- ForecastSample ----------------------------------------------------

ForecastSample::ForecastSample(VectorXd errors, MatrixXd instruments,
                               std::vector<std::string> names, int horizon)
    : errors_(std::move(errors)),
      instruments_(std::move(instruments)),
      names_(std::move(names)),
      horizon_(horizon) {
  if (instruments_.rows() != errors_.size()) {
    throw ConfigError("ForecastSample: instrument rows (" + std::to_string(instruments_.rows()) +
                      ") differ from error count (" + std::to_string(errors_.size()) + ")");
  }
  if (instruments_.cols() < 1) throw ConfigError("ForecastSample: need at least one instrument");
  if (horizon_ < 1) throw ConfigError("ForecastSample: horizon must be >= 1");
  if (!errors_.allFinite() || !instruments_.allFinite()) {
    throw DataError("ForecastSample: non-finite error or instrument value");
  }
  if (names_.empty()) {
    for (Index j = 0; j < instruments_.cols(); ++j) names_.push_back("v" + std::to_string(j + 1));
  }
  if (static_cast<Index>(names_.size()) != instruments_.cols()) {
    throw ConfigError("ForecastSample: one name per instrument column required");
  }
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw ConfigError("ForecastSample: duplicate instrument name '" + n + "'");
  }
}

Index ForecastSample::column(std::string_view name) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j] == name) return static_cast<Index>(j);
  }
  throw ConfigError("unknown instrument '" + std::string(name) + "'");
}

std::vector<Index> ForecastSample::columns(std::span<const std::string> names) const {
  std::vector<Index> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(column(n));
  return out;
}

ForecastSample ForecastSample::select(std::span<const Index> cols) const {
  std::vector<Index> idx(cols.begin(), cols.end());
  std::vector<std::string> names;
  for (Index j : idx) {
    if (j < 0 || j >= dim()) throw ConfigError("ForecastSample::select: column out of range");
    names.push_back(names_[static_cast<std::size_t>(j)]);
  }
  return ForecastSample(errors_, instruments_(Eigen::all, idx), std::move(names), horizon_);
}

ForecastSample ForecastSample::select_names(std::span<const std::string> names) const {
  const auto idx = columns(names);
  return select(idx);
}

// ---- aggregates --------------------------------------------------------

MomentAggregates aggregates(const ForecastSample& sample, double alpha, WeightingMode mode, int p,
                            bool check_spd) {
  const Index n = sample.size();
  const Index d = sample.dim();
  if (n == 0) throw ConfigError("aggregates: empty sample");
  const VectorXd& e = sample.errors();
  const MatrixXd& v = sample.instruments();

  VectorXd g(n), neg(n);
  for (Index t = 0; t < n; ++t) {
    g(t) = generalized_error(e(t), p);
    neg(t) = e(t) < 0.0 ? g(t) : 0.0;
  }

  MomentAggregates agg;
  agg.b = v.transpose() * g / static_cast<double>(n);
  agg.c = v.transpose() * neg / static_cast<double>(n);
  agg.weighting = mode;
  agg.alpha = alpha;
  agg.T = n;
  agg.p = p;

  if (mode == WeightingMode::identity) {
    agg.s = MatrixXd::Identity(d, d);
    return agg;
  }

  VectorXd w(n);
  for (Index t = 0; t < n; ++t) {
    const double u = (e(t) < 0.0 ? 1.0 : 0.0) - alpha;
    w(t) = u * u * g(t) * g(t);
  }
  const MatrixXd vw = v.array().colwise() * w.array();
  MatrixXd s = v.transpose() * vw / static_cast<double>(n);
  agg.s = (s + s.transpose()) / 2.0;
  if (!check_spd) return agg;
  try {
    (void)cholesky(agg.s);
  } catch (const NotPositiveDefinite&) {
    throw SingularWeighting("efficient weighting matrix is singular (duplicate or degenerate instruments?)");
  }
  return agg;
}

MomentAggregates restrict(const MomentAggregates& agg, std::span<const Index> idx) {
  std::vector<Index> cols(idx.begin(), idx.end());
  MomentAggregates out = agg;
  out.b = agg.b(cols);
  out.c = agg.c(cols);
  out.s = agg.s(cols, cols);
  return out;
}

VectorXd gbar(const MomentAggregates& agg, double alpha) { return agg.c - alpha * agg.b; }

}  // namespace fr
