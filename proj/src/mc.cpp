#include "fr/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

#include "fr/rationality.hpp"

namespace fr {

std::string to_string(PartitionPolicy p) {
  return p == PartitionPolicy::structural ? "structural" : "constant";
}

PartitionPolicy parse_partition_policy(std::string_view text) {
  if (text == "structural") return PartitionPolicy::structural;
  if (text == "constant") return PartitionPolicy::constant;
  throw ConfigError("unknown partition policy '" + std::string(text) + "' (structural or constant)");
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::vr: return "VR";
    case Outcome::vr_plus: return "VR+";
    case Outcome::inv: return "INV";
    case Outcome::other: return "other";
    case Outcome::failed: return "failed";
  }
  return "unknown";
}

void McConfig::validate() const {
  dgp.validate();
  pgmm.validate();
  if (replications < 1) throw ConfigError("mc: replications must be >= 1");
  if (threads < 0) throw ConfigError("mc: threads must be >= 0");
}

MomentPartition policy_partition(const DgpDraw& draw, PartitionPolicy policy,
                                 std::vector<Index>* relevant_doubt) {
  MomentPartition part;
  if (relevant_doubt) relevant_doubt->clear();
  for (std::size_t j = 0; j < draw.roles.size(); ++j) {
    const Index col = static_cast<Index>(j);
    const ColumnRole role = draw.roles[j];
    const bool good = role == ColumnRole::constant ||
                      (role == ColumnRole::structural && policy == PartitionPolicy::structural);
    if (good) {
      part.good.push_back(col);
    } else {
      part.doubt.push_back(col);
      if (role == ColumnRole::structural && relevant_doubt) relevant_doubt->push_back(col);
    }
  }
  return part;
}

namespace {

SetFit fit_set(const ForecastSample& sample, const std::vector<Index>& cols, const GmmOptions& opts) {
  const GmmFit f = fit_iterated(sample.select(cols), opts);
  return {f.alpha_hat, f.se};
}

std::vector<Index> columns_with(const DgpDraw& draw, std::initializer_list<ColumnRole> roles) {
  std::vector<Index> out;
  for (std::size_t j = 0; j < draw.roles.size(); ++j) {
    if (std::find(roles.begin(), roles.end(), draw.roles[j]) != roles.end()) {
      out.push_back(static_cast<Index>(j));
    }
  }
  return out;
}

}  // namespace

RepRecord run_replication(const McConfig& cfg, Index rep) {
  RepRecord rec;
  rec.rep = rep;
  try {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(rep));
    const DgpDraw draw = generate(cfg.dgp, rng);
    const ForecastSample sample = split_and_forecast(draw, cfg.dgp.alpha0);

    std::vector<Index> relevant;
    const MomentPartition part = policy_partition(draw, cfg.policy, &relevant);
    const PgmmResult res = run_pgmm(sample, part, cfg.pgmm);
    rec.selected = res.selected;
    rec.cd_converged = res.solution.converged;

    const std::set<Index> sel(res.selected.begin(), res.selected.end());
    const std::set<Index> rel(relevant.begin(), relevant.end());
    const bool any_invalid = std::any_of(sel.begin(), sel.end(), [&](Index j) {
      return draw.roles[static_cast<std::size_t>(j)] == ColumnRole::invalid;
    });
    if (any_invalid) {
      rec.outcome = Outcome::inv;
    } else if (sel == rel) {
      rec.outcome = Outcome::vr;
    } else if (std::includes(sel.begin(), sel.end(), rel.begin(), rel.end())) {
      rec.outcome = Outcome::vr_plus;
    } else {
      rec.outcome = Outcome::other;
    }

    rec.pgmm = {res.post_fit.alpha_hat, res.post_fit.se};
    const TestReport j = j_rationality(res.post_fit);
    const TestReport j05 = j_symmetry(res.post_fit);
    rec.j = j.statistic;
    rec.j_p = j.p_value.value_or(1.0);
    rec.j05 = j05.statistic;
    rec.j05_p = j05.p_value.value_or(1.0);

    const GmmOptions opts = cfg.pgmm.gmm_options();
    rec.oracle = fit_set(sample, columns_with(draw, {ColumnRole::constant, ColumnRole::structural}), opts);
    std::vector<Index> all(static_cast<std::size_t>(sample.dim()));
    for (std::size_t j2 = 0; j2 < all.size(); ++j2) all[j2] = static_cast<Index>(j2);
    rec.all = fit_set(sample, all, opts);
    rec.con = fit_set(sample, {0}, opts);
    rec.con_first = fit_set(sample, {0, 1}, opts);
  } catch (const Error& e) {
    rec.outcome = Outcome::failed;
    rec.error = e.what();
  }
  return rec;
}

int default_threads() {
  if (const char* env = std::getenv("FR_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<RepRecord> run_replications(const McConfig& cfg) {
  cfg.validate();
  const Index n = cfg.replications;
  std::vector<RepRecord> out(static_cast<std::size_t>(n));
  const int threads =
      static_cast<int>(std::min<Index>(n, cfg.threads > 0 ? cfg.threads : default_threads()));
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index r = next++; r < n; r = next++) out[static_cast<std::size_t>(r)] = run_replication(cfg, r);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

Quantiles quantiles(std::vector<double> x) {
  Quantiles q;
  if (x.empty()) return q;
  double sum = 0.0;
  for (double v : x) sum += v;
  q.mean = sum / static_cast<double>(x.size());
  std::sort(x.begin(), x.end());
  auto at = [&](double p) {
    const double h = p * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
  };
  q.q05 = at(0.05);
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  q.q95 = at(0.95);
  return q;
}

McSummary summarize(const std::vector<RepRecord>& records) {
  McSummary s;
  s.replications = static_cast<Index>(records.size());
  std::vector<double> a_p, se_p, a_o, se_o, a_a, se_a, a_c, se_c, a_c1, se_c1, j, j05;
  Index vr = 0, vrp = 0, inv = 0, other = 0, below = 0, j_rej = 0, j05_rej = 0;
  for (const auto& r : records) {
    switch (r.outcome) {
      case Outcome::vr: ++vr; break;
      case Outcome::vr_plus: ++vrp; break;
      case Outcome::inv: ++inv; break;
      case Outcome::other: ++other; break;
      case Outcome::failed: ++s.failures; continue;
    }
    a_p.push_back(r.pgmm.alpha);
    se_p.push_back(r.pgmm.se);
    a_o.push_back(r.oracle.alpha);
    se_o.push_back(r.oracle.se);
    a_a.push_back(r.all.alpha);
    se_a.push_back(r.all.se);
    a_c.push_back(r.con.alpha);
    se_c.push_back(r.con.se);
    a_c1.push_back(r.con_first.alpha);
    se_c1.push_back(r.con_first.se);
    j.push_back(r.j);
    j05.push_back(r.j05);
    if (r.pgmm.se < r.con.se) ++below;
    if (r.j_p < 0.05) ++j_rej;
    if (r.j05_p < 0.05) ++j05_rej;
  }
  const double n = static_cast<double>(s.replications);
  s.p_vr = static_cast<double>(vr) / n;
  s.p_vr_plus = static_cast<double>(vrp) / n;
  s.p_inv = static_cast<double>(inv) / n;
  s.p_other = static_cast<double>(other) / n;
  const Index ok = s.replications - s.failures;
  if (ok > 0) {
    const double m = static_cast<double>(ok);
    s.alpha_mean = quantiles(a_p).mean;
    s.alpha_se_median = quantiles(se_p).median;
    s.oracle = {quantiles(a_o).mean, quantiles(se_o).median};
    s.all = {quantiles(a_a).mean, quantiles(se_a).median};
    s.con = {quantiles(a_c).mean, quantiles(se_c).median};
    s.con_first = {quantiles(a_c1).mean, quantiles(se_c1).median};
    s.frac_se_below_con = static_cast<double>(below) / m;
    s.j_stats = quantiles(j);
    s.j05_stats = quantiles(j05);
    s.j_reject_05 = static_cast<double>(j_rej) / m;
    s.j05_reject_05 = static_cast<double>(j05_rej) / m;
  }
  return s;
}

McSummary run_mc(const McConfig& cfg) { return summarize(run_replications(cfg)); }

std::string format_summary(const McConfig& cfg, const McSummary& s) {
  std::ostringstream os;
  char buf[256];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    os << buf << '\n';
  };
  line("dgp=%s T=%lld alpha0=%.4f theta1=%.4f partition=%s weighting=%s reps=%lld seed=%llu",
       to_string(cfg.dgp.variant).c_str(), static_cast<long long>(cfg.dgp.T), cfg.dgp.alpha0,
       cfg.dgp.coefficients()(1), to_string(cfg.policy).c_str(),
       to_string(cfg.pgmm.weighting).c_str(), static_cast<long long>(cfg.replications),
       static_cast<unsigned long long>(cfg.seed));
  line("%-10s %8s %8s %8s %8s %8s", "selection", "P(VR)", "P(VR+)", "P(INV)", "other", "failed");
  line("%-10s %8.4f %8.4f %8.4f %8.4f %8lld", "", s.p_vr, s.p_vr_plus, s.p_inv, s.p_other,
       static_cast<long long>(s.failures));
  line("%-10s %10s %10s", "set", "mean a", "median se");
  line("%-10s %10.4f %10.5f", "P-GMM", s.alpha_mean, s.alpha_se_median);
  line("%-10s %10.4f %10.5f", "VR", s.oracle.alpha_mean, s.oracle.se_median);
  line("%-10s %10.4f %10.5f", "All", s.all.alpha_mean, s.all.se_median);
  line("%-10s %10.4f %10.5f", "CON", s.con.alpha_mean, s.con.se_median);
  line("%-10s %10.4f %10.5f", "CON+1", s.con_first.alpha_mean, s.con_first.se_median);
  line("se(P-GMM) < se(CON): %.4f", s.frac_se_below_con);
  line("%-6s %9s %9s %9s %9s %9s", "test", "mean", "q05", "median", "q95", "rej5%");
  line("%-6s %9.4f %9.4f %9.4f %9.4f %9.4f", "J", s.j_stats.mean, s.j_stats.q05, s.j_stats.median,
       s.j_stats.q95, s.j_reject_05);
  line("%-6s %9.4f %9.4f %9.4f %9.4f %9.4f", "J(0.5)", s.j05_stats.mean, s.j05_stats.q05,
       s.j05_stats.median, s.j05_stats.q95, s.j05_reject_05);
  return os.str();
}

}  // namespace fr
