#pragma once

// Flexible asymmetric loss and the sample moment objects
//
//   B = T^-1 sum V_t |e_t|^(p-1)
//   C = T^-1 sum V_t 1(e_t < 0) |e_t|^(p-1)
//   S = T^-1 sum V_t V_t' (1(e_t < 0) - alpha)^2 |e_t|^(2p-2)
//
// from which the moment vector gbar(alpha) = C - alpha B is formed.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fr/errors.hpp"
#include "fr/numerics.hpp"

namespace fr {

/// Loss exponent p (1 or 2) and asymmetry alpha in (0, 1).
struct LossSpec {
  int p = 2;
  double alpha = 0.5;

  LossSpec() = default;
  LossSpec(int p_, double alpha_);
};

enum class WeightingMode { identity, efficient };

std::string to_string(WeightingMode mode);
WeightingMode parse_weighting(std::string_view text);

/// [alpha + (1 - 2 alpha) 1(e < 0)] |e|^p
double loss_value(double e, const LossSpec& spec);

/// |e|^(p-1), with |0|^0 = 1.
double generalized_error(double e, int p);

/// V_t (1(e < 0) - alpha) |e|^(p-1): the per-period moment contribution.
template <typename Derived>
VectorXd moment_row(const Eigen::MatrixBase<Derived>& v, double e, const LossSpec& spec) {
  const double ind = e < 0.0 ? 1.0 : 0.0;
  return v * ((ind - spec.alpha) * generalized_error(e, spec.p));
}

/// Forecast errors paired with a T x d instrument matrix with named columns.
class ForecastSample {
 public:
  ForecastSample(VectorXd errors, MatrixXd instruments, std::vector<std::string> names = {},
                 int horizon = 1);

  Index size() const noexcept { return errors_.size(); }
  Index dim() const noexcept { return instruments_.cols(); }
  int horizon() const noexcept { return horizon_; }

  const VectorXd& errors() const noexcept { return errors_; }
  const MatrixXd& instruments() const noexcept { return instruments_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  /// Column position of a named instrument; throws ConfigError when absent.
  Index column(std::string_view name) const;
  std::vector<Index> columns(std::span<const std::string> names) const;

  ForecastSample select(std::span<const Index> cols) const;
  ForecastSample select_names(std::span<const std::string> names) const;

  /// Fewer observations than d + 1. Allowed, but worth a warning.
  bool thin() const noexcept { return size() < dim() + 1; }

 private:
  VectorXd errors_;
  MatrixXd instruments_;
  std::vector<std::string> names_;
  int horizon_;
};

struct MomentAggregates {
  VectorXd b;
  VectorXd c;
  MatrixXd s;
  WeightingMode weighting = WeightingMode::identity;
  double alpha = 0.5;  // alpha at which s was evaluated
  Index T = 0;
  int p = 2;

  Index dim() const noexcept { return b.size(); }
};

/// B, C and the weighting matrix. In efficient mode S is checked for
/// positive definiteness (SingularWeighting) unless check_spd is false; in
/// identity mode S = I.
MomentAggregates aggregates(const ForecastSample& sample, double alpha, WeightingMode mode,
                            int p = 2, bool check_spd = true);

/// Same aggregates restricted to a subset of moments (rows/cols of S).
MomentAggregates restrict(const MomentAggregates& agg, std::span<const Index> idx);

/// C - alpha B.
VectorXd gbar(const MomentAggregates& agg, double alpha);

}  // namespace fr
