#pragma once

// Simulation designs: a linear and a nonlinear regression with a block of
// valid-but-irrelevant instruments and a block of instruments contaminated
// by the regression error, an asymmetric least squares forecast producer,
// and the 50/50 split that turns a simulated dataset into forecast errors.

#include <optional>
#include <string>
#include <vector>

#include "fr/moments.hpp"

namespace fr {

enum class DgpVariant { linear, nonlinear };

std::string to_string(DgpVariant v);
DgpVariant parse_dgp(std::string_view text);

enum class ColumnRole { constant, structural, valid_irrelevant, invalid };

std::string to_string(ColumnRole r);

struct DgpSpec {
  DgpVariant variant = DgpVariant::linear;
  VectorXd theta;  // empty: (1, .4, .4) linear, (1, .5, .5, .4) nonlinear
  std::optional<double> theta1_weak;  // overrides theta(1)
  double c0 = 0.5;
  double cbar = 2.4;
  Index T = 2000;
  double alpha0 = 0.5;
  int p0 = 2;
  Index n_valid_irrelevant = 14;
  Index n_invalid = 13;
  double noise_sd = 1.0;

  VectorXd coefficients() const;
  /// Constant plus structural regressors (3 linear, 4 nonlinear).
  Index n_structural() const;
  /// Instrument count d.
  Index dim() const;
  void validate() const;
};

/// c_l = c0 + (l - 1)(cbar - c0) / (d/2 - 1) for the l-th invalid
/// instrument (1-based), real division.
double contamination(const DgpSpec& spec, Index l);

struct DgpDraw {
  MatrixXd regressors;  // T x k, first column constant
  VectorXd y;
  VectorXd u;
  MatrixXd instruments;  // T x d
  std::vector<std::string> names;
  std::vector<ColumnRole> roles;
};

DgpDraw generate(const DgpSpec& spec, RngStream& rng);

struct ProducerFit {
  VectorXd theta_hat;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // asymmetric squared loss per step
};

/// Minimizes sum_t [a + (1 - 2a) 1(e_t < 0)] e_t^2 by iteratively
/// reweighted least squares (weight a for e >= 0, 1 - a for e < 0),
/// starting from OLS.
ProducerFit producer_fit(const MatrixXd& x, const VectorXd& y, double alpha0, int max_iter = 500,
                         double tol = 1e-10);

/// Fits the producer on the first half and returns the out-of-sample errors
/// of the second half with that half's instruments.
ForecastSample split_and_forecast(const DgpDraw& draw, const ProducerFit& fit);
ForecastSample split_and_forecast(const DgpDraw& draw, double alpha0, ProducerFit* fit_out = nullptr);

/// The a-expectile of N(0, 1).
double normal_expectile(double a);

/// Actual and forecast series in file order: row t holds the realized value
/// at t and the forecast issued at t for t + 1.
struct SeriesPair {
  VectorXd actual;
  VectorXd forecast;
};

/// AR(1) growth series with GARCH(1,1) volatility. The forecaster issues
/// the alpha0-optimal forecast plus kappa times the previous change in
/// optimal forecasts, which leaves the lagged forecast change invalid.
SeriesPair spf_like_series(Index n, double alpha0, double kappa, RngStream& rng);

}  // namespace fr
