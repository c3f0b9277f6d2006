#include <gtest/gtest.h>

#include <cstdlib>

#include "fr/mc.hpp"
#include "oracles.hpp"

using namespace fr;

TEST(DgpSpec, Dimensions) {
  DgpSpec lin;
  EXPECT_EQ(lin.dim(), 30);
  EXPECT_EQ(lin.coefficients(), (VectorXd{{1.0, 0.4, 0.4}}));
  DgpSpec non;
  non.variant = DgpVariant::nonlinear;
  EXPECT_EQ(non.dim(), 31);
  EXPECT_EQ(non.coefficients().size(), 4);
  lin.theta1_weak = 0.07;
  EXPECT_EQ(lin.coefficients()(1), 0.07);
}

TEST(DgpSpec, Validation) {
  DgpSpec s;
  s.T = 201;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.alpha0 = 1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.theta = VectorXd::Ones(2);
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_THROW(parse_dgp("quadratic"), ConfigError);
}

TEST(Contamination, GridEndpoints) {
  const DgpSpec s;
  EXPECT_DOUBLE_EQ(contamination(s, 1), 0.5);
  // The grid reaches cbar at l = d/2.
  EXPECT_NEAR(contamination(s, s.dim() / 2), 2.4, 1e-14);
  EXPECT_NEAR(contamination(s, 2) - contamination(s, 1), 1.9 / 14.0, 1e-15);
  EXPECT_THROW(contamination(s, 0), ConfigError);
}

TEST(Generate, ColumnLayoutAndRoles) {
  DgpSpec s;
  s.T = 200;
  RngStream rng(1, 0);
  const DgpDraw d = generate(s, rng);
  ASSERT_EQ(d.instruments.cols(), 30);
  EXPECT_EQ(d.names.front(), "const");
  EXPECT_EQ(d.names[3], "wv1");
  EXPECT_EQ(d.names.back(), "winv13");
  EXPECT_EQ(d.roles[1], ColumnRole::structural);
  EXPECT_EQ(d.roles[16], ColumnRole::valid_irrelevant);
  EXPECT_EQ(d.roles[17], ColumnRole::invalid);
  EXPECT_LT((d.y - d.regressors * s.coefficients() - d.u).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(d.instruments.leftCols(3), d.regressors);
}

TEST(Generate, InvalidColumnsCorrelateWithError) {
  DgpSpec s;
  s.T = 100000;
  RngStream rng(2, 0);
  const DgpDraw d = generate(s, rng);
  auto corr = [](const VectorXd& a, const VectorXd& b) {
    const VectorXd x = a.array() - a.mean(), y = b.array() - b.mean();
    return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
  };
  for (Index l = 1; l <= 13; ++l) {
    const double c = contamination(s, l);
    EXPECT_NEAR(corr(d.instruments.col(16 + l), d.u), c / std::sqrt(1.0 + c * c), 0.01) << l;
  }
  for (Index j = 3; j < 17; ++j) EXPECT_LT(std::abs(corr(d.instruments.col(j), d.u)), 0.015);
  EXPECT_NEAR(corr(d.regressors.col(1), d.regressors.col(2)), 0.2, 0.01);
}

TEST(Generate, NonlinearRegressors) {
  DgpSpec s;
  s.variant = DgpVariant::nonlinear;
  s.T = 50000;
  RngStream rng(3, 0);
  const DgpDraw d = generate(s, rng);
  EXPECT_EQ(d.names[1], "w1sq");
  EXPECT_EQ(d.names[3], "expw3");
  // E[W1^2] = 4.
  EXPECT_NEAR(d.regressors.col(1).mean(), 4.0, 0.1);
  EXPECT_TRUE((d.regressors.col(3).array() > 0.0).all());
}

TEST(Generate, ReproducibleAndStreamSpecific) {
  DgpSpec s;
  s.T = 100;
  RngStream a(7, 3), b(7, 3), c(7, 4);
  const DgpDraw da = generate(s, a), db = generate(s, b), dc = generate(s, c);
  EXPECT_EQ(da.instruments, db.instruments);
  EXPECT_NE(da.instruments, dc.instruments);
}

TEST(NormalExpectile, MatchesQuadratureOracle) {
  EXPECT_NEAR(normal_expectile(0.5), 0.0, 1e-14);
  for (double a : {0.05, 0.2, 0.3, 0.7, 0.8, 0.95}) {
    EXPECT_NEAR(normal_expectile(a), oracle::normal_expectile(a), 1e-9) << a;
    EXPECT_NEAR(normal_expectile(a), -normal_expectile(1.0 - a), 1e-12);
  }
  EXPECT_THROW(normal_expectile(0.0), DomainError);
}

TEST(ProducerFit, SymmetricLossIsOls) {
  DgpSpec s;
  s.T = 400;
  RngStream rng(4, 0);
  const DgpDraw d = generate(s, rng);
  const ProducerFit f = producer_fit(d.regressors, d.y, 0.5);
  const VectorXd ols = d.regressors.colPivHouseholderQr().solve(d.y);
  EXPECT_LT((f.theta_hat - ols).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(f.converged);
}

TEST(ProducerFit, FirstOrderConditionAndMonotoneLoss) {
  for (double a : {0.2, 0.35, 0.8}) {
    DgpSpec s;
    s.T = 2000;
    RngStream rng(5, 0);
    const DgpDraw d = generate(s, rng);
    const ProducerFit f = producer_fit(d.regressors, d.y, a);
    ASSERT_TRUE(f.converged);
    const VectorXd e = d.y - d.regressors * f.theta_hat;
    VectorXd g = VectorXd::Zero(3);
    for (Index t = 0; t < e.size(); ++t) g += (e(t) < 0.0 ? 1.0 - a : a) * e(t) * d.regressors.row(t).transpose();
    EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-8 * e.size());
    for (std::size_t k = 1; k < f.objective_trace.size(); ++k) {
      EXPECT_LE(f.objective_trace[k], f.objective_trace[k - 1] * (1.0 + 1e-12));
    }
    // The intercept shifts by the a-expectile of the N(0, 1) error.
    EXPECT_NEAR(f.theta_hat(0) - 1.0, normal_expectile(a), 0.1);
  }
}

TEST(ProducerFit, InputChecks) {
  EXPECT_THROW(producer_fit(MatrixXd::Ones(4, 3), VectorXd::Ones(4), 0.5), ConfigError);
  EXPECT_THROW(producer_fit(MatrixXd::Ones(20, 1), VectorXd::Ones(19), 0.5), ConfigError);
}

TEST(SplitAndForecast, HalfSampleErrors) {
  DgpSpec s;
  s.T = 200;
  RngStream rng(6, 0);
  const DgpDraw d = generate(s, rng);
  ProducerFit pf;
  const ForecastSample fs = split_and_forecast(d, 0.5, &pf);
  EXPECT_EQ(fs.size(), 100);
  EXPECT_EQ(fs.dim(), 30);
  EXPECT_EQ(fs.names(), d.names);
  EXPECT_NEAR(fs.errors()(0), d.y(100) - d.regressors.row(100).dot(pf.theta_hat), 1e-12);
  EXPECT_EQ(fs.instruments().row(99), d.instruments.row(199));
}

TEST(SplitAndForecast, NoiselessDesignIsDegenerate) {
  DgpSpec s;
  s.T = 200;
  s.noise_sd = 0.0;
  RngStream rng(7, 0);
  const ForecastSample fs = split_and_forecast(generate(s, rng), 0.5);
  const std::vector<Index> cols{0, 1, 2};
  // Errors are float dust around zero: either the moments vanish or the
  // fitted alpha is meaningless. Exact zeros must throw.
  const ForecastSample zero(VectorXd::Zero(fs.size()), fs.instruments());
  EXPECT_THROW(fit_iterated(zero.select(cols), {}), DegenerateMoments);
  EXPECT_LT(fs.errors().cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SpfLikeSeries, ForecastAlignment) {
  RngStream rng(8, 0);
  const SeriesPair p = spf_like_series(400, 0.3, 0.0, rng);
  EXPECT_EQ(p.actual.size(), 400);
  EXPECT_EQ(p.forecast.size(), 400);
  EXPECT_THROW(spf_like_series(5, 0.3, 0.0, rng), ConfigError);
  // With kappa = 0 the forecast issued at t for t+1 is the 0.3-expectile
  // forecast, so errors actual(t+1) - forecast(t) have a negative share of
  // absolute mass near 0.3.
  double neg = 0.0, tot = 0.0;
  for (Index t = 0; t + 1 < 400; ++t) {
    const double e = p.actual(t + 1) - p.forecast(t);
    tot += std::abs(e);
    if (e < 0) neg += std::abs(e);
  }
  EXPECT_NEAR(neg / tot, 0.3, 0.06);
}

// ---- Monte Carlo -----------------------------------------------------------

TEST(Quantiles, TypeSeven) {
  const Quantiles q = quantiles({4.0, 1.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(q.mean, 2.5);
  EXPECT_DOUBLE_EQ(q.median, 2.5);
  EXPECT_DOUBLE_EQ(q.q25, 1.75);
  EXPECT_DOUBLE_EQ(q.q95, 3.85);
  EXPECT_DOUBLE_EQ(quantiles({5.0}).q05, 5.0);
}

TEST(PolicyPartition, StructuralAndConstant) {
  DgpSpec s;
  s.T = 40;
  RngStream rng(9, 0);
  const DgpDraw d = generate(s, rng);
  std::vector<Index> rel;
  const MomentPartition a = policy_partition(d, PartitionPolicy::structural, &rel);
  EXPECT_EQ(a.good, (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(a.doubt.size(), 27u);
  EXPECT_TRUE(rel.empty());
  const MomentPartition b = policy_partition(d, PartitionPolicy::constant, &rel);
  EXPECT_EQ(b.good, std::vector<Index>{0});
  EXPECT_EQ(rel, (std::vector<Index>{1, 2}));
}

TEST(Mc, SerialAndParallelRecordsAreIdentical) {
  McConfig cfg;
  cfg.dgp.T = 400;
  cfg.replications = 12;
  cfg.seed = 11;
  cfg.threads = 1;
  const auto a = run_replications(cfg);
  cfg.threads = 4;
  const auto b = run_replications(cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].rep, static_cast<Index>(i));
    EXPECT_EQ(a[i].outcome, b[i].outcome);
    EXPECT_EQ(a[i].selected, b[i].selected);
    EXPECT_EQ(a[i].pgmm.alpha, b[i].pgmm.alpha);
    EXPECT_EQ(a[i].pgmm.se, b[i].pgmm.se);
    EXPECT_EQ(a[i].j, b[i].j);
  }
  EXPECT_EQ(format_summary(cfg, summarize(a)), format_summary(cfg, summarize(b)));
}

TEST(Mc, OutcomeSharesAddUp) {
  McConfig cfg;
  cfg.dgp.T = 400;
  cfg.replications = 20;
  cfg.threads = 2;
  const McSummary s = run_mc(cfg);
  EXPECT_EQ(s.replications, 20);
  EXPECT_NEAR(s.p_vr + s.p_vr_plus + s.p_inv + s.p_other + static_cast<double>(s.failures) / 20.0, 1.0,
              1e-12);
  EXPECT_GE(s.frac_se_below_con, 0.0);
  EXPECT_LE(s.frac_se_below_con, 1.0);
}

TEST(Mc, ConstantPolicyRun) {
  McConfig cfg;
  cfg.dgp.T = 400;
  cfg.replications = 6;
  cfg.policy = PartitionPolicy::constant;
  const auto recs = run_replications(cfg);
  for (const auto& r : recs) {
    EXPECT_NE(r.outcome, Outcome::failed) << r.error;
    EXPECT_TRUE(std::isfinite(r.pgmm.alpha));
  }
}

TEST(Mc, ThreadCountFromEnvironment) {
  setenv("FR_THREADS", "3", 1);
  EXPECT_EQ(default_threads(), 3);
  unsetenv("FR_THREADS");
  EXPECT_GE(default_threads(), 1);
}

TEST(Mc, ConfigValidation) {
  McConfig cfg;
  cfg.replications = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(parse_partition_policy("all"), ConfigError);
}
