#pragma once

// Overidentification test of rationality, the symmetry test at alpha = 0.5
// and the t-test of alpha against 0.5.

#include <optional>
#include <string>

#include "fr/gmm.hpp"

namespace fr {

enum class TestKind { rationality_j, symmetry_j, symmetry_t };

std::string to_string(TestKind kind);

struct TestReport {
  TestKind kind = TestKind::rationality_j;
  double statistic = 0.0;
  int df = 0;
  std::optional<double> p_value;  // empty when exactly identified
  Index d = 0;
  Index T = 0;
  bool exactly_identified = false;
};

/// J = T gbar(a)' S(a)^-1 gbar(a) at the fitted alpha, chi2 with d - 1 df.
/// With a single moment the model is exactly identified: the report carries
/// statistic 0, df 0 and no p-value.
TestReport j_rationality(const GmmFit& fit);

/// J(0.5) = T gbar(0.5)' S(a)^-1 gbar(0.5), weighting still at the fitted
/// alpha, chi2 with d df.
TestReport j_symmetry(const GmmFit& fit);

/// (alpha - 0.5) / se with a two-sided normal p-value.
TestReport t_symmetry(const GmmFit& fit);
TestReport t_symmetry(double alpha, double se, Index d = 0, Index T = 0);

}  // namespace fr
