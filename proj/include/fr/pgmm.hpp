#pragma once

// Penalized GMM moment selection.
//
// Every doubt moment l gets a slackness parameter beta_l, so the augmented
// moment vector is
//
//   gbar(alpha, beta) = C - alpha B - E_D beta,
//
// where E_D places beta_l at the doubt column's position. The solver
// minimizes gbar' W gbar + sum_l lambda_l omega_l |beta_l| by coordinate
// descent; doubt moments whose beta ends at exactly zero are selected.

#include <limits>
#include <string>
#include <vector>

#include "fr/gmm.hpp"

namespace fr {

/// Column indices of the good set G and the doubt set D.
struct MomentPartition {
  std::vector<Index> good;
  std::vector<Index> doubt;

  /// Throws ConfigError unless both sets are disjoint, in range and G is
  /// non-empty.
  void validate(Index d) const;

  /// Good columns by name; doubt defaults to every other column.
  static MomentPartition from_names(const ForecastSample& sample,
                                    const std::vector<std::string>& good,
                                    const std::vector<std::string>& doubt = {});
};

/// Which matrix supplies row l in the tuning formula.
enum class TuningRow { inv_sqrt, inverse };

std::string to_string(TuningRow row);
TuningRow parse_tuning_row(std::string_view text);

struct PgmmConfig {
  double r1 = 3.0;
  double r2 = 2.0;
  int p = 2;
  // Weighting for the preliminary fit, the penalized objective, the tuning
  // constants and the post-selection point estimate. Relevance and standard
  // errors always use the efficient S-hat.
  WeightingMode weighting = WeightingMode::identity;
  TuningRow tuning_row = TuningRow::inv_sqrt;
  double cd_tol = 1e-8;
  int cd_max_iter = 10000;
  double zero_tol = 1e-7;
  double gmm_tol = 1e-10;
  int gmm_max_iter = 200;

  void validate() const;
  GmmOptions gmm_options() const { return {p, weighting, gmm_tol, gmm_max_iter}; }
};

inline constexpr double kInfinitePenalty = std::numeric_limits<double>::infinity();

/// Unpenalized joint fit (lambda = 0). W is the weighting matrix that stays
/// fixed for the penalized solve.
struct PreliminaryFit {
  double alpha_dot = 0.0;
  VectorXd beta_dot;
  MatrixXd w;
  MomentAggregates aggregates;  // efficient, evaluated at alpha_dot
};

/// Minimize (c - X theta)' W (c - X theta) + sum_l penalty_l |theta_(l+1)|,
/// theta = (alpha, beta). Column 0 of X is unpenalized.
struct PenalizedProblem {
  MatrixXd x;
  VectorXd c;
  MatrixXd w;
  VectorXd penalty;  // one per beta, +inf forces that beta to zero
  VectorXd start;    // starting theta
};

struct PenalizedSolution {
  double alpha = 0.0;
  VectorXd beta;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective after each sweep
};

struct ExclusionDiagnostic {
  Index column = 0;
  double beta_dot = 0.0;
  double mu_dot = 0.0;
  double z = 0.0;  // |beta_dot| sqrt(T) / sqrt(S_ll)
  std::string label;  // heuristic: likely_invalid or likely_irrelevant
};

struct PgmmResult {
  MomentPartition partition;
  PreliminaryFit preliminary;
  VectorXd mu_dot;
  std::vector<bool> mu_failed;  // per-l SingularWeighting in the relevance step
  VectorXd omega;
  VectorXd lambda;
  PenalizedProblem problem;
  PenalizedSolution solution;
  double alpha_hat = 0.0;
  VectorXd beta_hat;
  std::vector<Index> selected;  // doubt columns with beta exactly zero
  std::vector<Index> excluded;
  std::vector<ExclusionDiagnostic> diagnostics;
  GmmFit post_fit;
  bool refitted = false;
};

PreliminaryFit preliminary_fit(const ForecastSample& sample, const MomentPartition& part,
                               const PgmmConfig& cfg);

/// B'_(G+l) S^-1 B_(G+l) - B'_G S_G^-1 B_G for each doubt column, both from
/// the efficient S-hat at alpha_dot. failed[l] is set (and mu 0) when the
/// nested block is singular.
VectorXd relevance(const ForecastSample& sample, const MomentPartition& part, double alpha_dot,
                   const PgmmConfig& cfg, std::vector<bool>* failed = nullptr);

/// max(mu, 0)^r1 |beta_dot|^-r2, +inf when |beta_dot| < 1e-12.
VectorXd adaptive_weights(const VectorXd& mu, const VectorXd& beta_dot, const PgmmConfig& cfg);

/// Projection I - R G (G' S^-1 G)^-1 G' R with G = -B and R = S^-1/2.
MatrixXd tuning_projector(const VectorXd& b, const MatrixXd& s);

/// 2 |row_l . Pi| d^(r2/4) T^(-1/2 - r2/4) for each doubt column.
VectorXd tuning(const ForecastSample& sample, const MomentPartition& part, double alpha_dot,
                const PgmmConfig& cfg);

double soft_threshold(double z, double gamma);

double penalized_objective(const PenalizedProblem& prob, double alpha, const VectorXd& beta);

PenalizedSolution coordinate_descent(const PenalizedProblem& prob, const PgmmConfig& cfg);

/// Runs the preliminary fit, relevance, weights and tuning, then the
/// coordinate descent. Selection sets and the post fit are left empty.
PgmmResult solve_penalized(const ForecastSample& sample, const MomentPartition& part,
                           const PgmmConfig& cfg);

/// Selected = doubt columns with beta exactly zero. Refits alpha on
/// G + selected with the configured weighting.
void classify_and_refit(PgmmResult& result, const ForecastSample& sample, const PgmmConfig& cfg);

PgmmResult run_pgmm(const ForecastSample& sample, const MomentPartition& part,
                    const PgmmConfig& cfg);

}  // namespace fr
