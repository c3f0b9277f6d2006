#pragma once

// Monte Carlo driver: replication r draws from RngStream(seed, r), so the
// per-replication records and their in-order aggregation do not depend on
// the number of worker threads.

#include <cstdint>
#include <string>
#include <vector>

#include "fr/dgp.hpp"
#include "fr/pgmm.hpp"

namespace fr {

/// structural: G = constant plus structural regressors, so the relevant
/// doubt set is empty. constant: G = {constant}, structural regressors are
/// doubt moments that should be selected.
enum class PartitionPolicy { structural, constant };

std::string to_string(PartitionPolicy p);
PartitionPolicy parse_partition_policy(std::string_view text);

enum class Outcome { vr, vr_plus, inv, other, failed };

std::string to_string(Outcome o);

struct McConfig {
  DgpSpec dgp;
  PgmmConfig pgmm;
  PartitionPolicy policy = PartitionPolicy::structural;
  Index replications = 200;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: FR_THREADS or hardware concurrency

  void validate() const;
};

/// Partition and the relevant doubt columns implied by a policy.
MomentPartition policy_partition(const DgpDraw& draw, PartitionPolicy policy,
                                 std::vector<Index>* relevant_doubt = nullptr);

struct SetFit {
  double alpha = 0.0;
  double se = 0.0;
};

struct RepRecord {
  Index rep = 0;
  Outcome outcome = Outcome::failed;
  std::string error;
  std::vector<Index> selected;
  bool cd_converged = true;
  SetFit pgmm, oracle, all, con, con_first;
  double j = 0.0, j_p = 1.0;      // rationality J of the post-selection fit
  double j05 = 0.0, j05_p = 1.0;  // symmetry J of the post-selection fit
};

RepRecord run_replication(const McConfig& cfg, Index rep);

struct Quantiles {
  double mean = 0.0;
  double q05 = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, q95 = 0.0;
};

/// Type-7 (linear interpolation) sample quantiles.
Quantiles quantiles(std::vector<double> x);

struct SetSummary {
  double alpha_mean = 0.0;
  double se_median = 0.0;
};

struct McSummary {
  Index replications = 0;
  Index failures = 0;
  double p_vr = 0.0, p_vr_plus = 0.0, p_inv = 0.0, p_other = 0.0;
  double alpha_mean = 0.0;
  double alpha_se_median = 0.0;
  SetSummary oracle, all, con, con_first;
  double frac_se_below_con = 0.0;  // se(P-GMM) < se(constant only)
  Quantiles j_stats, j05_stats;
  double j_reject_05 = 0.0, j05_reject_05 = 0.0;
};

/// Runs replications 0..n-1 on a thread pool; records come back in index
/// order.
std::vector<RepRecord> run_replications(const McConfig& cfg);

McSummary summarize(const std::vector<RepRecord>& records);

McSummary run_mc(const McConfig& cfg);

/// Thread count used when McConfig::threads is 0.
int default_threads();

/// Fixed-format text table; byte-identical for identical summaries.
std::string format_summary(const McConfig& cfg, const McSummary& s);

}  // namespace fr
