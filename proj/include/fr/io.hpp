#pragma once

// Delimited-text input of actual/forecast series, growth rates, the
// instrument set built from a series pair, and CSV round-trips of forecast
// samples.

#include <iosfwd>
#include <string>
#include <vector>

#include "fr/moments.hpp"

namespace fr {

/// Row t holds the realized value at t and the forecast issued at t for
/// t + 1. Forecast errors are always derived, never read.
struct SeriesInput {
  std::vector<std::string> periods;
  VectorXd actual;
  VectorXd forecast;

  Index size() const noexcept { return actual.size(); }
};

struct SeriesSchema {
  std::string period_column = "period";  // optional in the file
  std::string actual_column = "actual";
  std::string forecast_column = "forecast";
  char delimiter = ',';
};

/// Header row required. Throws ParseError (1-based row/column) on blank or
/// non-numeric cells and LengthMismatch when a row has the wrong number of
/// fields.
SeriesInput load_series(const std::string& path, const SeriesSchema& schema = {});
SeriesInput load_series(std::istream& in, const SeriesSchema& schema = {},
                        const std::string& source = "<input>");

void write_series(std::ostream& out, const SeriesInput& s);

/// ln(x_t) - ln(x_(t-1)), optionally times 100. DomainError on x <= 0.
VectorXd growth_rate(const VectorXd& x, bool percent = false);

/// Growth rates of both series; the first period is dropped.
SeriesInput to_growth(const SeriesInput& s, bool percent = false);

/// Errors e_t = actual_t - forecast_(t-1) paired with the instruments
/// [1, |e_(t-1)|, actual_(t-1) - actual_(t-2), forecast_(t-1) - forecast_(t-2)]
/// for t = 2..N-1. TooShort when fewer than 5 rows are usable.
ForecastSample build_instruments(const VectorXd& actual, const VectorXd& forecast);
ForecastSample build_instruments(const SeriesInput& s);

inline const std::vector<std::string>& instrument_names() {
  static const std::vector<std::string> names{"const", "abs_lag_err", "dactual", "dforecast"};
  return names;
}

/// Forecast sample as CSV: an "error" column followed by one column per
/// instrument, doubles written with 17 significant digits.
void write_sample(std::ostream& out, const ForecastSample& sample);
ForecastSample load_sample(const std::string& path);
ForecastSample load_sample(std::istream& in, const std::string& source = "<input>");

/// True when the file's header contains an "error" column.
bool is_sample_file(const std::string& path);

}  // namespace fr
