#pragma once

// Linear GMM for the asymmetry parameter. The moment vector is affine in
// alpha, so for a fixed weighting matrix S the criterion
//
//   Q(alpha) = gbar(alpha)' S^-1 gbar(alpha)
//
// is an exact quadratic with minimizer (B'S^-1 B)^-1 B'S^-1 C.

#include <Eigen/Dense>

#include "fr/moments.hpp"

namespace fr {

struct GmmOptions {
  int p = 2;
  WeightingMode weighting = WeightingMode::identity;
  double tol = 1e-10;
  int max_iter = 200;
};

struct GmmFit {
  double alpha_hat = 0.0;       // unrestricted closed-form value
  double alpha_reported = 0.0;  // clamped to [1e-6, 1 - 1e-6]
  bool clamped = false;
  double se = 0.0;
  double q_min = 0.0;  // Q at alpha_hat under the fit's own weighting
  Index d = 0;
  Index T = 0;
  int p = 2;
  WeightingMode weighting = WeightingMode::identity;
  int iterations = 0;
  bool converged = true;
  // Efficient-mode aggregates at alpha_hat; used for se and the J statistics.
  MomentAggregates aggregates;
};

/// Closed-form minimizer for given B, C and S. Throws DegenerateMoments
/// when B'S^-1 B <= 1e-14.
double fit_closed_form(const VectorXd& b, const VectorXd& c, const MatrixXd& s);
double fit_closed_form(const ForecastSample& sample, const MatrixXd& s, int p = 2);

/// Identity mode: one pass with S = I. Efficient mode: start from S = I and
/// alternate the closed form with S-hat(alpha) until successive estimates
/// differ by less than tol. A fit that exhausts max_iter is returned with
/// converged = false.
GmmFit fit_iterated(const ForecastSample& sample, const GmmOptions& opts = {});

/// Q(alpha) = gbar' S^-1 gbar using the aggregates' weighting matrix.
double objective(const MomentAggregates& agg, double alpha);

/// sqrt((B' S^-1 B)^-1 / T) from efficient aggregates.
double std_error(const MomentAggregates& efficient);
double std_error(const GmmFit& fit);

/// B' S^-1 B, the information about alpha carried by the moments.
double information(const MomentAggregates& agg);

}  // namespace fr
