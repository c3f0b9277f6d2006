#include "fr/numerics.hpp"

#include <algorithm>
#include <limits>

namespace fr {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 100000;

double log_prefactor(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

// Series for P(a, x); converges for every x but is preferred when x < a.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(log_prefactor(a, x));
}

// Modified Lentz continued fraction for Q(a, x), used when x >= a.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor(a, x)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || std::isnan(x)) {
    throw DomainError("incomplete gamma: requires a > 0 and x >= 0");
  }
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a ? gamma_p_series(a, x) : 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a ? 1.0 - gamma_p_series(a, x) : gamma_q_fraction(a, x);
}

double chi2_sf(double x, int k) {
  if (k < 1) throw DomainError("chi2_sf: degrees of freedom must be >= 1");
  if (!(x >= 0.0)) throw DomainError("chi2_sf: statistic must be >= 0");
  const double q = gamma_q(0.5 * k, 0.5 * x);
  return std::clamp(q, 0.0, 1.0);
}

double normal_two_sided_p(double t) {
  return std::clamp(std::erfc(std::abs(t) / std::sqrt(2.0)), 0.0, 1.0);
}

// ---- RngStream ---------------------------------------------------------

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id), engine_(seeded_engine(seed, stream_id)) {}

double RngStream::uniform() {
  // (k + 0.5) / 2^53 keeps the draw strictly inside (0, 1).
  const std::uint64_t k = engine_() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

VectorXd RngStream::normal_vector(Index n) {
  VectorXd z(n);
  for (Index i = 0; i < n; ++i) z(i) = normal();
  return z;
}

VectorXd mvn_sample(const VectorXd& mean, const MatrixXd& cov, RngStream& rng) {
  if (cov.rows() != mean.size()) throw ConfigError("mvn_sample: dimension mismatch");
  const MatrixXd l = cholesky(cov);
  return mean + l * rng.normal_vector(mean.size());
}

MatrixXd mvn_sample_rows(const VectorXd& mean, const MatrixXd& cov, Index n, RngStream& rng) {
  if (cov.rows() != mean.size()) throw ConfigError("mvn_sample_rows: dimension mismatch");
  const MatrixXd l = cholesky(cov);
  const Index k = mean.size();
  MatrixXd out(n, k);
  for (Index i = 0; i < n; ++i) {
    out.row(i) = (mean + l * rng.normal_vector(k)).transpose();
  }
  return out;
}

}  // namespace fr
