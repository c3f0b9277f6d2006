#include "fr/dgp.hpp"

#include <cmath>

namespace fr {

std::string to_string(DgpVariant v) { return v == DgpVariant::linear ? "linear" : "nonlinear"; }

DgpVariant parse_dgp(std::string_view text) {
  if (text == "linear") return DgpVariant::linear;
  if (text == "nonlinear") return DgpVariant::nonlinear;
  throw ConfigError("unknown dgp '" + std::string(text) + "' (linear or nonlinear)");
}

std::string to_string(ColumnRole r) {
  switch (r) {
    case ColumnRole::constant: return "constant";
    case ColumnRole::structural: return "structural";
    case ColumnRole::valid_irrelevant: return "valid_irrelevant";
    case ColumnRole::invalid: return "invalid";
  }
  return "unknown";
}

// ---- spec -----------------------------------------------------------------

VectorXd DgpSpec::coefficients() const {
  VectorXd th = theta;
  if (th.size() == 0) {
    th = variant == DgpVariant::linear ? VectorXd{{1.0, 0.4, 0.4}} : VectorXd{{1.0, 0.5, 0.5, 0.4}};
  }
  if (theta1_weak) th(1) = *theta1_weak;
  return th;
}

Index DgpSpec::n_structural() const { return variant == DgpVariant::linear ? 3 : 4; }

Index DgpSpec::dim() const { return n_structural() + n_valid_irrelevant + n_invalid; }

void DgpSpec::validate() const {
  if (coefficients().size() != n_structural()) {
    throw ConfigError("dgp: theta must have " + std::to_string(n_structural()) + " entries");
  }
  if (!(c0 < cbar)) throw ConfigError("dgp: c0 must be below cbar");
  if (T < 20 || T % 2 != 0) throw ConfigError("dgp: T must be even and at least 20");
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw ConfigError("dgp: alpha0 must lie in (0, 1)");
  if (p0 != 2) throw ConfigError("dgp: only the p0 = 2 producer is available");
  if (n_valid_irrelevant < 0 || n_invalid < 0) throw ConfigError("dgp: negative block size");
  if (n_invalid > 14) throw ConfigError("dgp: at most 14 invalid instruments (W* block size)");
  if (n_invalid > 1 && !(dim() > 2)) throw ConfigError("dgp: d/2 - 1 must be positive");
  if (!(noise_sd >= 0.0)) throw ConfigError("dgp: noise_sd must be >= 0");
}

double contamination(const DgpSpec& spec, Index l) {
  if (l < 1) throw ConfigError("contamination: index is 1-based");
  const double half = static_cast<double>(spec.dim()) / 2.0 - 1.0;
  return spec.c0 + static_cast<double>(l - 1) * (spec.cbar - spec.c0) / half;
}

// ---- generation -----------------------------------------------------------

DgpDraw generate(const DgpSpec& spec, RngStream& rng) {
  spec.validate();
  const Index T = spec.T;
  const Index ks = spec.n_structural();
  const Index nv = spec.n_valid_irrelevant;
  const Index ni = spec.n_invalid;
  constexpr Index kStarBlock = 14;

  MatrixXd cov;
  if (spec.variant == DgpVariant::linear) {
    cov = MatrixXd{{1.0, 0.2}, {0.2, 1.0}};
  } else {
    cov = MatrixXd{{4.0, 0.2, 0.04}, {0.2, 10.0, 0.2}, {0.04, 0.2, 8.0}};
  }
  const Index nw = cov.rows();
  const MatrixXd chol = cholesky(cov);

  MatrixXd w(T, nw), wv(T, nv), ws(T, kStarBlock);
  VectorXd u(T);
  for (Index t = 0; t < T; ++t) {
    w.row(t) = (chol * rng.normal_vector(nw)).transpose();
    for (Index j = 0; j < nv; ++j) wv(t, j) = rng.normal();
    for (Index j = 0; j < kStarBlock; ++j) ws(t, j) = rng.normal();
    u(t) = spec.noise_sd * rng.normal();
  }

  DgpDraw out;
  out.regressors.resize(T, ks);
  out.regressors.col(0).setOnes();
  if (spec.variant == DgpVariant::linear) {
    out.regressors.col(1) = w.col(0);
    out.regressors.col(2) = w.col(1);
    out.names = {"const", "w1", "w2"};
  } else {
    out.regressors.col(1) = w.col(0).array().square();
    out.regressors.col(2) = w.col(0).array() * w.col(1).array();
    out.regressors.col(3) = w.col(2).array().exp();
    out.names = {"const", "w1sq", "w1w2", "expw3"};
  }
  out.roles.assign(1, ColumnRole::constant);
  out.roles.resize(static_cast<std::size_t>(ks), ColumnRole::structural);
  out.u = u;
  out.y = out.regressors * spec.coefficients() + u;

  out.instruments.resize(T, spec.dim());
  out.instruments.leftCols(ks) = out.regressors;
  out.instruments.middleCols(ks, nv) = wv;
  for (Index j = 0; j < nv; ++j) {
    out.names.push_back("wv" + std::to_string(j + 1));
    out.roles.push_back(ColumnRole::valid_irrelevant);
  }
  for (Index l = 1; l <= ni; ++l) {
    out.instruments.col(ks + nv + l - 1) = ws.col(l - 1) + contamination(spec, l) * u;
    out.names.push_back("winv" + std::to_string(l));
    out.roles.push_back(ColumnRole::invalid);
  }
  return out;
}

// ---- producer -------------------------------------------------------------

namespace {

double asymmetric_sq_loss(const VectorXd& e, double a) {
  double s = 0.0;
  for (Index t = 0; t < e.size(); ++t) s += (e(t) < 0.0 ? 1.0 - a : a) * e(t) * e(t);
  return s;
}

VectorXd weighted_ls(const MatrixXd& x, const VectorXd& y, const VectorXd& w) {
  const MatrixXd xw = x.array().colwise() * w.array();
  const MatrixXd l = cholesky(MatrixXd(x.transpose() * xw));
  return l.transpose().triangularView<Eigen::Upper>().solve(
      l.triangularView<Eigen::Lower>().solve(xw.transpose() * y));
}

}  // namespace

ProducerFit producer_fit(const MatrixXd& x, const VectorXd& y, double alpha0, int max_iter,
                         double tol) {
  if (x.rows() != y.size()) throw ConfigError("producer_fit: row mismatch");
  if (x.rows() < x.cols() + 5) throw ConfigError("producer_fit: in-sample size too small");
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw ConfigError("producer_fit: alpha0 must lie in (0, 1)");

  ProducerFit fit;
  fit.theta_hat = weighted_ls(x, y, VectorXd::Ones(y.size()));
  VectorXd e = y - x * fit.theta_hat;
  fit.objective_trace.push_back(asymmetric_sq_loss(e, alpha0));
  for (int k = 1; k <= max_iter; ++k) {
    VectorXd w(e.size());
    for (Index t = 0; t < e.size(); ++t) w(t) = e(t) < 0.0 ? 1.0 - alpha0 : alpha0;
    const VectorXd next = weighted_ls(x, y, w);
    const double step = (next - fit.theta_hat).cwiseAbs().maxCoeff();
    fit.theta_hat = next;
    fit.iterations = k;
    const VectorXd e_next = y - x * fit.theta_hat;
    fit.objective_trace.push_back(asymmetric_sq_loss(e_next, alpha0));
    bool same_signs = true;
    for (Index t = 0; t < e.size() && same_signs; ++t) same_signs = (e(t) < 0.0) == (e_next(t) < 0.0);
    e = e_next;
    if (step < tol || same_signs) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

ForecastSample split_and_forecast(const DgpDraw& draw, const ProducerFit& fit) {
  const Index T = draw.y.size();
  const Index h = T / 2;
  const Index n = T - h;
  const VectorXd e = draw.y.tail(n) - draw.regressors.bottomRows(n) * fit.theta_hat;
  return ForecastSample(e, draw.instruments.bottomRows(n), draw.names, 1);
}

ForecastSample split_and_forecast(const DgpDraw& draw, double alpha0, ProducerFit* fit_out) {
  const Index h = draw.y.size() / 2;
  ProducerFit fit = producer_fit(draw.regressors.topRows(h), draw.y.head(h), alpha0);
  ForecastSample out = split_and_forecast(draw, fit);
  if (fit_out) *fit_out = std::move(fit);
  return out;
}

// ---- expectiles and the SPF-like series -----------------------------------

double normal_expectile(double a) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("normal_expectile: a must lie in (0, 1)");
  // (1 - a) E[(m - X)+] - a E[(X - m)+] is increasing in m.
  auto g = [a](double m) {
    const double pdf = std::exp(-0.5 * m * m) / std::sqrt(2.0 * M_PI);
    const double cdf = 0.5 * std::erfc(-m / std::sqrt(2.0));
    return (1.0 - a) * (m * cdf + pdf) - a * (pdf - m * (1.0 - cdf));
  };
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SeriesPair spf_like_series(Index n, double alpha0, double kappa, RngStream& rng) {
  if (n < 8) throw ConfigError("spf_like_series: need at least 8 rows");
  constexpr Index burn = 50;
  const Index len = n + burn + 1;
  const double m = normal_expectile(alpha0);

  VectorXd a = VectorXd::Zero(len), opt = VectorXd::Zero(len), f = VectorXd::Zero(len);
  double s2 = 1.0, innov = 0.0;
  a(0) = 0.5 / 0.7;
  opt(0) = a(0);
  for (Index t = 1; t < len; ++t) {
    s2 = 0.2 + 0.3 * innov * innov + 0.5 * s2;
    const double mean = 0.5 + 0.3 * a(t - 1);
    opt(t) = mean + std::sqrt(s2) * m;
    innov = std::sqrt(s2) * rng.normal();
    a(t) = mean + innov;
  }
  for (Index t = 0; t < len; ++t) {
    f(t) = opt(t) + (t >= 2 ? kappa * (opt(t - 1) - opt(t - 2)) : 0.0);
  }

  // f(t) targets period t; the file row t carries the forecast for t + 1.
  SeriesPair out;
  out.actual = a.segment(burn, n);
  out.forecast = f.segment(burn + 1, n);
  return out;
}

}  // namespace fr
