#include "fr/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fr/dgp.hpp"
#include "fr/io.hpp"
#include "fr/mc.hpp"
#include "fr/pgmm.hpp"
#include "fr/rationality.hpp"

namespace fr {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// ---- shared option blocks -------------------------------------------------

struct OutputOpts {
  std::string json_path;
  bool no_table = false;

  void add(CLI::App* app) {
    app->add_option("--json", json_path, "Write the JSON record to this path instead of stdout");
    app->add_flag("--no-table", no_table, "Suppress the human-readable table");
  }
};

struct InputOpts {
  std::string path;
  bool growth = false;
  bool percent = false;
  std::vector<std::string> instruments;

  void add(CLI::App* app, bool with_instruments) {
    app->add_option("--input", path, "Series file (period,actual,forecast) or forecast-sample file")
        ->required();
    app->add_flag("--growth", growth, "Convert levels to log growth rates before estimation");
    app->add_flag("--percent", percent, "Scale growth rates by 100");
    if (with_instruments) {
      app->add_option("--instruments", instruments, "Instrument columns (default: all)")
          ->delimiter(',');
    }
  }
};

struct FitOpts {
  int p = 2;
  std::string weighting = "identity";
  double tol = 1e-10;
  int max_iter = 200;

  void add(CLI::App* app) {
    app->add_option("--p", p, "Loss exponent (1 or 2)")->check(CLI::IsMember({1, 2}));
    app->add_option("--weighting", weighting, "identity or efficient")
        ->check(CLI::IsMember({"identity", "efficient"}));
    app->add_option("--tol", tol, "Convergence tolerance of the weighting iteration");
    app->add_option("--max-iter", max_iter, "Iteration limit of the weighting iteration");
  }
  GmmOptions options() const { return {p, parse_weighting(weighting), tol, max_iter}; }
};

struct PgmmOpts {
  double r1 = 3.0;
  double r2 = 2.0;
  std::string tuning_row = "inv_sqrt";
  double cd_tol = 1e-8;
  int cd_max_iter = 10000;
  double zero_tol = 1e-7;

  void add(CLI::App* app) {
    app->add_option("--r1", r1, "Relevance exponent in the adaptive weight");
    app->add_option("--r2", r2, "Slackness exponent in the adaptive weight");
    app->add_option("--tuning-row", tuning_row, "inv_sqrt or inverse")
        ->check(CLI::IsMember({"inv_sqrt", "inverse"}));
    app->add_option("--cd-tol", cd_tol, "Coordinate descent tolerance");
    app->add_option("--cd-max-iter", cd_max_iter, "Coordinate descent sweep limit");
    app->add_option("--zero-tol", zero_tol, "Snap threshold for exact zeros");
  }
  PgmmConfig config(const FitOpts& f) const {
    PgmmConfig c;
    c.r1 = r1;
    c.r2 = r2;
    c.p = f.p;
    c.weighting = parse_weighting(f.weighting);
    c.tuning_row = parse_tuning_row(tuning_row);
    c.cd_tol = cd_tol;
    c.cd_max_iter = cd_max_iter;
    c.zero_tol = zero_tol;
    c.gmm_tol = f.tol;
    c.gmm_max_iter = f.max_iter;
    c.validate();
    return c;
  }
};

struct DgpOpts {
  std::string dgp = "linear";
  Index T = 2000;
  double alpha0 = 0.5;
  std::optional<double> theta1;
  Index n_valid = 14;
  Index n_invalid = 13;

  void add(CLI::App* app) {
    app->add_option("--dgp", dgp, "linear or nonlinear")->check(CLI::IsMember({"linear", "nonlinear"}));
    app->add_option("--T", T, "Total sample size (half estimation, half evaluation)");
    app->add_option("--alpha0", alpha0, "Forecaster's true asymmetry");
    app->add_option("--theta1", theta1, "Override the first slope coefficient (0.07: weak identification)");
    app->add_option("--n-valid", n_valid, "Valid-but-irrelevant instrument count");
    app->add_option("--n-invalid", n_invalid, "Invalid instrument count");
  }
  DgpSpec spec() const {
    DgpSpec s;
    s.variant = parse_dgp(dgp);
    s.T = T;
    s.alpha0 = alpha0;
    s.theta1_weak = theta1;
    s.n_valid_irrelevant = n_valid;
    s.n_invalid = n_invalid;
    s.validate();
    return s;
  }
};

// ---- formatting ------------------------------------------------------------

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::vector<std::string> names_of(const ForecastSample& s, const std::vector<Index>& cols) {
  std::vector<std::string> out;
  for (Index j : cols) out.push_back(s.names()[static_cast<std::size_t>(j)]);
  return out;
}

std::vector<double> to_vec(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

ordered_json matrix_json(const MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(to_vec(m.row(i).transpose()));
  return rows;
}

ordered_json fit_json(const GmmFit& f, const std::vector<std::string>& names) {
  ordered_json j;
  j["instruments"] = names;
  j["alpha_hat"] = f.alpha_hat;
  j["alpha_reported"] = f.alpha_reported;
  j["clamped"] = f.clamped;
  j["se"] = f.se;
  j["q_min"] = f.q_min;
  j["d"] = f.d;
  j["T"] = f.T;
  j["p"] = f.p;
  j["weighting"] = to_string(f.weighting);
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  j["aggregates"] = {{"alpha", f.aggregates.alpha},
                     {"b", to_vec(f.aggregates.b)},
                     {"c", to_vec(f.aggregates.c)},
                     {"s", matrix_json(f.aggregates.s)}};
  return j;
}

ordered_json test_json(const TestReport& r) {
  ordered_json j;
  j["kind"] = to_string(r.kind);
  j["statistic"] = r.statistic;
  j["df"] = r.df;
  j["p_value"] = r.p_value ? json(*r.p_value) : json(nullptr);
  j["exactly_identified"] = r.exactly_identified;
  j["d"] = r.d;
  j["T"] = r.T;
  return j;
}

GmmFit fit_from_json(const json& j) {
  GmmFit f;
  f.alpha_hat = j.at("alpha_hat").get<double>();
  f.alpha_reported = j.at("alpha_reported").get<double>();
  f.clamped = j.at("clamped").get<bool>();
  f.se = j.at("se").get<double>();
  f.q_min = j.at("q_min").get<double>();
  f.d = j.at("d").get<Index>();
  f.T = j.at("T").get<Index>();
  f.p = j.at("p").get<int>();
  f.weighting = parse_weighting(j.at("weighting").get<std::string>());
  f.iterations = j.at("iterations").get<int>();
  f.converged = j.at("converged").get<bool>();
  const json& a = j.at("aggregates");
  const auto b = a.at("b").get<std::vector<double>>();
  const auto c = a.at("c").get<std::vector<double>>();
  const auto s = a.at("s").get<std::vector<std::vector<double>>>();
  const auto d = static_cast<Index>(b.size());
  if (static_cast<Index>(c.size()) != d || static_cast<Index>(s.size()) != d || d != f.d) {
    throw DataError("fit record: aggregate dimensions do not match d");
  }
  f.aggregates.b = Eigen::Map<const VectorXd>(b.data(), d);
  f.aggregates.c = Eigen::Map<const VectorXd>(c.data(), d);
  f.aggregates.s.resize(d, d);
  for (Index i = 0; i < d; ++i) {
    if (static_cast<Index>(s[static_cast<std::size_t>(i)].size()) != d) {
      throw DataError("fit record: weighting matrix is not square");
    }
    for (Index k = 0; k < d; ++k) f.aggregates.s(i, k) = s[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  f.aggregates.weighting = WeightingMode::efficient;
  f.aggregates.alpha = a.at("alpha").get<double>();
  f.aggregates.T = f.T;
  f.aggregates.p = f.p;
  return f;
}

void emit(const ordered_json& record, const std::string& table, const OutputOpts& o, std::ostream& out) {
  if (!o.no_table) out << table;
  if (o.json_path.empty()) {
    out << record.dump(2) << '\n';
  } else {
    std::ofstream f(o.json_path);
    if (!f) throw DataError("cannot write '" + o.json_path + "'");
    f << record.dump(2) << '\n';
  }
}

std::string tests_table(const TestReport& j, const TestReport& j05, const TestReport& t) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %12s %4s %10s\n", "test", "statistic", "df", "p-value");
  os << buf;
  if (j.exactly_identified) {
    std::snprintf(buf, sizeof buf, "%-8s %12s %4s %10s\n", "J", "-", "-", "(exact id)");
  } else {
    std::snprintf(buf, sizeof buf, "%-8s %12.4f %4d %10.4f\n", "J", j.statistic, j.df, *j.p_value);
  }
  os << buf;
  std::snprintf(buf, sizeof buf, "%-8s %12.4f %4d %10.4f\n", "J(0.5)", j05.statistic, j05.df, *j05.p_value);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-8s %12.4f %4s %10.4f\n", "t(0.5)", t.statistic, "-", *t.p_value);
  os << buf;
  return os.str();
}

ordered_json tests_json(const TestReport& j, const TestReport& j05, const TestReport& t) {
  return {{"rationality_J", test_json(j)}, {"symmetry_J", test_json(j05)}, {"symmetry_t", test_json(t)}};
}

// ---- data loading -----------------------------------------------------------

ForecastSample load_any(const InputOpts& in) {
  if (is_sample_file(in.path)) {
    if (in.growth) throw ConfigError("--growth applies to series files, not forecast-sample files");
    return load_sample(in.path);
  }
  SeriesInput s = load_series(in.path);
  if (in.growth) s = to_growth(s, in.percent);
  return build_instruments(s);
}

ordered_json input_json(const InputOpts& in, const ForecastSample& s) {
  return {{"path", in.path}, {"growth", in.growth}, {"percent", in.percent},
          {"T", s.size()}, {"columns", s.names()}};
}

// ---- subcommands ------------------------------------------------------------

int run_estimate(const InputOpts& in, const FitOpts& fo, const OutputOpts& oo, std::ostream& out,
                 std::ostream& err) {
  ForecastSample sample = load_any(in);
  if (!in.instruments.empty()) sample = sample.select_names(in.instruments);
  if (sample.thin()) err << "warning: fewer observations than instruments + 1\n";
  const GmmFit fit = fit_iterated(sample, fo.options());
  const TestReport j = j_rationality(fit);
  const TestReport j05 = j_symmetry(fit);
  const TestReport t = t_symmetry(fit);

  std::ostringstream tab;
  tab << "estimate  T=" << fit.T << "  d=" << fit.d << "  p=" << fit.p
      << "  weighting=" << to_string(fit.weighting) << '\n';
  tab << "instruments: " << join(sample.names()) << '\n';
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %10s %10s %6s %9s\n", "alpha", "se", "Q_min", "iter", "clamped");
  tab << buf;
  std::snprintf(buf, sizeof buf, "%-10.6f %10.6f %10.6f %6d %9s\n", fit.alpha_reported, fit.se,
                fit.q_min, fit.iterations, fit.clamped ? "yes" : "no");
  tab << buf << tests_table(j, j05, t);
  if (!fit.converged) err << "warning: weighting iteration did not converge\n";

  ordered_json rec;
  rec["command"] = "estimate";
  rec["input"] = input_json(in, sample);
  rec["config"] = {{"p", fo.p}, {"weighting", fo.weighting}, {"tol", fo.tol}, {"max_iter", fo.max_iter}};
  rec["fit"] = fit_json(fit, sample.names());
  rec["tests"] = tests_json(j, j05, t);
  emit(rec, tab.str(), oo, out);
  return 0;
}

int run_select(const InputOpts& in, const FitOpts& fo, const PgmmOpts& po,
               const std::vector<std::string>& good, const std::vector<std::string>& doubt,
               const OutputOpts& oo, std::ostream& out, std::ostream& err) {
  ForecastSample sample = load_any(in);
  if (sample.thin()) err << "warning: fewer observations than instruments + 1\n";
  const PgmmConfig cfg = po.config(fo);
  const MomentPartition part = MomentPartition::from_names(sample, good, doubt);
  const PgmmResult res = run_pgmm(sample, part, cfg);
  const GmmFit& post = res.post_fit;
  const TestReport j = j_rationality(post);
  const TestReport j05 = j_symmetry(post);
  const TestReport t = t_symmetry(post);

  std::vector<Index> used = part.good;
  used.insert(used.end(), part.doubt.begin(), part.doubt.end());
  const GmmFit all = fit_iterated(sample.select(used), cfg.gmm_options());

  std::ostringstream tab;
  char buf[200];
  tab << "select  T=" << sample.size() << "  d=" << used.size() << "  weighting=" << to_string(cfg.weighting)
      << "  r1=" << cfg.r1 << "  r2=" << cfg.r2 << '\n';
  tab << "good: " << join(names_of(sample, part.good)) << '\n';
  tab << "selected: " << join(names_of(sample, res.selected)) << '\n';
  tab << "excluded: " << join(names_of(sample, res.excluded)) << '\n';
  std::snprintf(buf, sizeof buf, "%-14s %12s %12s %12s %12s %12s %9s\n", "doubt", "beta_dot", "mu_dot",
                "omega", "lambda", "beta_hat", "status");
  tab << buf;
  for (std::size_t l = 0; l < part.doubt.size(); ++l) {
    const auto li = static_cast<Index>(l);
    std::snprintf(buf, sizeof buf, "%-14s %12.4e %12.4e %12.4e %12.4e %12.4e %9s\n",
                  sample.names()[static_cast<std::size_t>(part.doubt[l])].c_str(),
                  res.preliminary.beta_dot(li), res.mu_dot(li), res.omega(li), res.lambda(li),
                  res.beta_hat(li), res.beta_hat(li) == 0.0 ? "selected" : "excluded");
    tab << buf;
  }
  for (const auto& dgn : res.diagnostics) {
    tab << "  " << sample.names()[static_cast<std::size_t>(dgn.column)] << ": " << dgn.label
        << " (z=" << fmt("%.3f", dgn.z) << ", heuristic)\n";
  }
  std::snprintf(buf, sizeof buf, "%-10s %10s %10s %6s\n", "fit", "alpha", "se", "d");
  tab << buf;
  std::snprintf(buf, sizeof buf, "%-10s %10.6f %10s %6s\n", "penalized", res.alpha_hat, "-", "-");
  tab << buf;
  std::snprintf(buf, sizeof buf, "%-10s %10.6f %10.6f %6lld\n", "P-GMM", post.alpha_reported, post.se,
                static_cast<long long>(post.d));
  tab << buf;
  std::snprintf(buf, sizeof buf, "%-10s %10.6f %10.6f %6lld\n", "All", all.alpha_reported, all.se,
                static_cast<long long>(all.d));
  tab << buf << tests_table(j, j05, t);
  if (!res.solution.converged) err << "warning: coordinate descent hit the sweep limit\n";

  ordered_json rec;
  rec["command"] = "select";
  rec["input"] = input_json(in, sample);
  rec["config"] = {{"p", cfg.p}, {"weighting", to_string(cfg.weighting)}, {"r1", cfg.r1}, {"r2", cfg.r2},
                   {"tuning_row", to_string(cfg.tuning_row)}, {"cd_tol", cfg.cd_tol},
                   {"cd_max_iter", cfg.cd_max_iter}, {"zero_tol", cfg.zero_tol},
                   {"good", names_of(sample, part.good)}, {"doubt", names_of(sample, part.doubt)}};
  ordered_json moments = ordered_json::array();
  for (std::size_t l = 0; l < part.doubt.size(); ++l) {
    const auto li = static_cast<Index>(l);
    moments.push_back({{"name", sample.names()[static_cast<std::size_t>(part.doubt[l])]},
                       {"beta_dot", res.preliminary.beta_dot(li)},
                       {"mu_dot", res.mu_dot(li)},
                       {"mu_failed", static_cast<bool>(res.mu_failed[l])},
                       {"omega", std::isinf(res.omega(li)) ? json("inf") : json(res.omega(li))},
                       {"lambda", res.lambda(li)},
                       {"beta_hat", res.beta_hat(li)},
                       {"selected", res.beta_hat(li) == 0.0}});
  }
  ordered_json diags = ordered_json::array();
  for (const auto& dgn : res.diagnostics) {
    diags.push_back({{"name", sample.names()[static_cast<std::size_t>(dgn.column)]},
                     {"beta_dot", dgn.beta_dot}, {"mu_dot", dgn.mu_dot}, {"z", dgn.z},
                     {"label", dgn.label}, {"heuristic", true}});
  }
  rec["preliminary"] = {{"alpha_dot", res.preliminary.alpha_dot}};
  rec["doubt_moments"] = moments;
  rec["penalized"] = {{"alpha_hat", res.alpha_hat}, {"sweeps", res.solution.sweeps},
                      {"converged", res.solution.converged}};
  rec["selected"] = names_of(sample, res.selected);
  rec["excluded"] = names_of(sample, res.excluded);
  rec["diagnostics"] = diags;
  rec["fit"] = fit_json(post, names_of(sample, [&] {
                          std::vector<Index> c = part.good;
                          c.insert(c.end(), res.selected.begin(), res.selected.end());
                          return c;
                        }()));
  rec["tests"] = tests_json(j, j05, t);
  rec["all_instruments"] = fit_json(all, names_of(sample, used));
  emit(rec, tab.str(), oo, out);
  return 0;
}

int run_test(const std::string& fit_path, const OutputOpts& oo, std::ostream& out) {
  std::ifstream f(fit_path);
  if (!f) throw DataError("cannot open '" + fit_path + "'");
  json rec;
  try {
    f >> rec;
  } catch (const json::exception& e) {
    throw DataError(fit_path + ": not a JSON record (" + e.what() + ")");
  }
  GmmFit fit;
  try {
    fit = fit_from_json(rec.contains("fit") ? rec.at("fit") : rec);
  } catch (const json::exception& e) {
    throw DataError(fit_path + ": missing fit fields (" + e.what() + ")");
  }
  const TestReport j = j_rationality(fit);
  const TestReport j05 = j_symmetry(fit);
  const TestReport t = t_symmetry(fit);

  std::ostringstream tab;
  tab << "test  T=" << fit.T << "  d=" << fit.d << "  alpha=" << fmt("%.6f", fit.alpha_reported)
      << "  se=" << fmt("%.6f", fit.se) << '\n'
      << tests_table(j, j05, t);
  ordered_json out_rec;
  out_rec["command"] = "test";
  out_rec["source"] = fit_path;
  out_rec["alpha_hat"] = fit.alpha_hat;
  out_rec["alpha_reported"] = fit.alpha_reported;
  out_rec["se"] = fit.se;
  out_rec["T"] = fit.T;
  out_rec["d"] = fit.d;
  out_rec["tests"] = tests_json(j, j05, t);
  emit(out_rec, tab.str(), oo, out);
  return 0;
}

int run_simulate(const DgpOpts& dopts, bool spf, Index spf_n, double kappa, std::uint64_t seed,
                 std::uint64_t rep, const std::string& output, const OutputOpts& oo, std::ostream& out) {
  std::ofstream f(output);
  if (!f) throw DataError("cannot write '" + output + "'");
  RngStream rng(seed, rep);
  ordered_json rec;
  rec["command"] = "simulate";
  rec["output"] = output;
  rec["seed"] = seed;
  rec["rep"] = rep;
  std::ostringstream tab;
  if (spf) {
    const SeriesPair s = spf_like_series(spf_n, dopts.alpha0, kappa, rng);
    SeriesInput series;
    series.actual = s.actual;
    series.forecast = s.forecast;
    for (Index t = 0; t < spf_n; ++t) series.periods.push_back(std::to_string(t + 1));
    write_series(f, series);
    rec["kind"] = "series";
    rec["rows"] = spf_n;
    rec["alpha0"] = dopts.alpha0;
    rec["kappa"] = kappa;
    tab << "simulate  series rows=" << spf_n << "  alpha0=" << fmt("%.4f", dopts.alpha0)
        << "  kappa=" << fmt("%.4f", kappa) << "  -> " << output << '\n';
  } else {
    const DgpSpec spec = dopts.spec();
    const DgpDraw draw = generate(spec, rng);
    ProducerFit pf;
    const ForecastSample sample = split_and_forecast(draw, spec.alpha0, &pf);
    write_sample(f, sample);
    std::vector<std::string> roles;
    for (auto r : draw.roles) roles.push_back(to_string(r));
    rec["kind"] = "sample";
    rec["dgp"] = to_string(spec.variant);
    rec["T"] = spec.T;
    rec["alpha0"] = spec.alpha0;
    rec["theta"] = to_vec(spec.coefficients());
    rec["columns"] = draw.names;
    rec["roles"] = roles;
    rec["producer"] = {{"theta_hat", to_vec(pf.theta_hat)}, {"iterations", pf.iterations},
                       {"converged", pf.converged}};
    rec["evaluation_rows"] = sample.size();
    tab << "simulate  dgp=" << to_string(spec.variant) << "  T=" << spec.T << "  alpha0="
        << fmt("%.4f", spec.alpha0) << "  evaluation rows=" << sample.size() << "  d=" << sample.dim()
        << "  -> " << output << '\n';
    tab << "producer theta_hat:";
    for (Index k = 0; k < pf.theta_hat.size(); ++k) tab << ' ' << fmt("%.6f", pf.theta_hat(k));
    tab << '\n';
  }
  emit(rec, tab.str(), oo, out);
  return 0;
}

ordered_json quantiles_json(const Quantiles& q) {
  return {{"mean", q.mean}, {"q05", q.q05}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"q95", q.q95}};
}

int run_mc_cmd(const McConfig& cfg, const std::string& records_path, const OutputOpts& oo,
               std::ostream& out) {
  const auto records = run_replications(cfg);
  const McSummary s = summarize(records);
  if (!records_path.empty()) {
    std::ofstream f(records_path);
    if (!f) throw DataError("cannot write '" + records_path + "'");
    f << "rep,outcome,n_selected,alpha_pgmm,se_pgmm,alpha_oracle,se_oracle,alpha_all,se_all,"
         "alpha_con,se_con,alpha_con1,se_con1,J,J_p,J05,J05_p,error\n";
    for (const auto& r : records) {
      f << r.rep << ',' << to_string(r.outcome) << ',' << r.selected.size();
      for (double v : {r.pgmm.alpha, r.pgmm.se, r.oracle.alpha, r.oracle.se, r.all.alpha, r.all.se,
                       r.con.alpha, r.con.se, r.con_first.alpha, r.con_first.se, r.j, r.j_p, r.j05,
                       r.j05_p}) {
        f << ',' << fmt("%.17g", v);
      }
      f << ',' << '"' << r.error << '"' << '\n';
    }
  }
  ordered_json rec;
  rec["command"] = "mc";
  rec["config"] = {{"dgp", to_string(cfg.dgp.variant)}, {"T", cfg.dgp.T}, {"alpha0", cfg.dgp.alpha0},
                   {"theta", to_vec(cfg.dgp.coefficients())}, {"n_valid", cfg.dgp.n_valid_irrelevant},
                   {"n_invalid", cfg.dgp.n_invalid}, {"partition", to_string(cfg.policy)},
                   {"weighting", to_string(cfg.pgmm.weighting)}, {"r1", cfg.pgmm.r1}, {"r2", cfg.pgmm.r2},
                   {"tuning_row", to_string(cfg.pgmm.tuning_row)}, {"replications", cfg.replications},
                   {"seed", cfg.seed}};
  rec["summary"] = {
      {"replications", s.replications}, {"failures", s.failures},
      {"p_vr", s.p_vr}, {"p_vr_plus", s.p_vr_plus}, {"p_inv", s.p_inv}, {"p_other", s.p_other},
      {"alpha_mean", s.alpha_mean}, {"alpha_se_median", s.alpha_se_median},
      {"oracle", {{"alpha_mean", s.oracle.alpha_mean}, {"se_median", s.oracle.se_median}}},
      {"all", {{"alpha_mean", s.all.alpha_mean}, {"se_median", s.all.se_median}}},
      {"con", {{"alpha_mean", s.con.alpha_mean}, {"se_median", s.con.se_median}}},
      {"con_first", {{"alpha_mean", s.con_first.alpha_mean}, {"se_median", s.con_first.se_median}}},
      {"frac_se_below_con", s.frac_se_below_con},
      {"j_stats", quantiles_json(s.j_stats)}, {"j05_stats", quantiles_json(s.j05_stats)},
      {"j_reject_05", s.j_reject_05}, {"j05_reject_05", s.j05_reject_05}};
  emit(rec, format_summary(cfg, s), oo, out);
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forecast rationality under flexible loss: estimation, tests and P-GMM moment selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fr-pgmm 1.0");

  // estimate
  auto* est = app.add_subcommand("estimate", "GMM estimate of alpha with J, J(0.5) and t tests");
  InputOpts est_in;
  FitOpts est_fit;
  OutputOpts est_out;
  est_in.add(est, true);
  est_fit.add(est);
  est_out.add(est);

  // select
  auto* sel = app.add_subcommand("select", "P-GMM moment selection and post-selection fit");
  InputOpts sel_in;
  FitOpts sel_fit;
  PgmmOpts sel_pgmm;
  OutputOpts sel_out;
  std::vector<std::string> good{"const"}, doubt;
  sel_in.add(sel, false);
  sel_fit.add(sel);
  sel_pgmm.add(sel);
  sel_out.add(sel);
  sel->add_option("--good", good, "Good instrument columns")->delimiter(',');
  sel->add_option("--doubt", doubt, "Doubt instrument columns (default: all others)")->delimiter(',');

  // test
  auto* tst = app.add_subcommand("test", "Re-run the J, J(0.5) and t tests on a saved fit record");
  std::string fit_path;
  OutputOpts tst_out;
  tst->add_option("--fit", fit_path, "JSON record written by estimate or select")->required();
  tst_out.add(tst);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Write a simulated forecast sample or series file");
  DgpOpts sim_dgp;
  OutputOpts sim_out;
  std::string sim_output;
  std::uint64_t sim_seed = 1, sim_rep = 0;
  bool sim_spf = false;
  Index spf_n = 802;
  double kappa = 0.5;
  sim_dgp.add(sim);
  sim_out.add(sim);
  sim->add_option("--output", sim_output, "Destination CSV")->required();
  sim->add_option("--seed", sim_seed, "Base seed");
  sim->add_option("--rep", sim_rep, "Stream id within the seed");
  sim->add_flag("--spf", sim_spf, "Write an actual/forecast series instead of a forecast sample");
  sim->add_option("--rows", spf_n, "Series length for --spf");
  sim->add_option("--kappa", kappa, "Weight on the previous forecast change for --spf");

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo selection and estimation summary");
  DgpOpts mc_dgp;
  FitOpts mc_fit;
  PgmmOpts mc_pgmm;
  OutputOpts mc_out;
  Index reps = 200;
  std::uint64_t mc_seed = 1;
  int threads = 0;
  std::string policy = "structural", records_path;
  mc_dgp.add(mc);
  mc_fit.add(mc);
  mc_pgmm.add(mc);
  mc_out.add(mc);
  mc->add_option("--reps", reps, "Replications");
  mc->add_option("--seed", mc_seed, "Base seed");
  mc->add_option("--threads", threads, "Worker threads (0: FR_THREADS or all cores)");
  mc->add_option("--partition", policy, "structural or constant")
      ->check(CLI::IsMember({"structural", "constant"}));
  mc->add_option("--records", records_path, "Write per-replication records to this CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "usage error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*est) return run_estimate(est_in, est_fit, est_out, out, err);
    if (*sel) return run_select(sel_in, sel_fit, sel_pgmm, good, doubt, sel_out, out, err);
    if (*tst) return run_test(fit_path, tst_out, out);
    if (*sim) return run_simulate(sim_dgp, sim_spf, spf_n, kappa, sim_seed, sim_rep, sim_output, sim_out, out);
    if (*mc) {
      McConfig cfg;
      cfg.dgp = mc_dgp.spec();
      cfg.pgmm = mc_pgmm.config(mc_fit);
      cfg.policy = parse_partition_policy(policy);
      cfg.replications = reps;
      cfg.seed = mc_seed;
      cfg.threads = threads;
      return run_mc_cmd(cfg, records_path, mc_out, out);
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return 3;
  }
  return 1;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("fr-pgmm");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fr
