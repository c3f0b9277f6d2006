#include "fr/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace fr {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

Table read_table(std::istream& in, char delim, const std::string& source) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (t.header.empty()) {
      t.header = split(line, delim);
      continue;
    }
    auto fields = split(line, delim);
    if (fields.size() != t.header.size()) {
      throw LengthMismatch(source + ": line " + std::to_string(lineno) + " has " +
                           std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (t.header.empty()) throw ParseError(source + ": missing header row", 1, 1);
  return t;
}

std::size_t find_column(const Table& t, const std::string& name, const std::string& source) {
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] == name) return j;
  }
  throw ParseError(source + ": header has no '" + name + "' column", 1, 1);
}

double parse_cell(const Table& t, std::size_t i, std::size_t j, const std::string& source) {
  const std::string& cell = t.rows[i][j];
  const std::size_t line = t.line_numbers[i];
  const std::string where = source + ": line " + std::to_string(line) + ", column " +
                            std::to_string(j + 1) + " ('" + t.header[j] + "')";
  if (cell.empty()) throw ParseError(where + " is blank", line, j + 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(where + " is not a number: '" + cell + "'", line, j + 1);
  }
  if (!std::isfinite(v)) throw ParseError(where + " is not finite", line, j + 1);
  return v;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---- series ---------------------------------------------------------------

SeriesInput load_series(std::istream& in, const SeriesSchema& schema, const std::string& source) {
  const Table t = read_table(in, schema.delimiter, source);
  const std::size_t ja = find_column(t, schema.actual_column, source);
  const std::size_t jf = find_column(t, schema.forecast_column, source);
  std::ptrdiff_t jp = -1;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] == schema.period_column) jp = static_cast<std::ptrdiff_t>(j);
  }
  SeriesInput s;
  const auto n = static_cast<Index>(t.rows.size());
  s.actual.resize(n);
  s.forecast.resize(n);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto ii = static_cast<Index>(i);
    s.actual(ii) = parse_cell(t, i, ja, source);
    s.forecast(ii) = parse_cell(t, i, jf, source);
    s.periods.push_back(jp >= 0 ? t.rows[i][static_cast<std::size_t>(jp)] : std::to_string(i + 1));
  }
  return s;
}

SeriesInput load_series(const std::string& path, const SeriesSchema& schema) {
  auto in = open(path);
  return load_series(in, schema, path);
}

void write_series(std::ostream& out, const SeriesInput& s) {
  out << "period,actual,forecast\n";
  for (Index t = 0; t < s.size(); ++t) {
    const auto label = static_cast<std::size_t>(t) < s.periods.size()
                           ? s.periods[static_cast<std::size_t>(t)]
                           : std::to_string(t + 1);
    out << label << ',' << fmt17(s.actual(t)) << ',' << fmt17(s.forecast(t)) << '\n';
  }
}

VectorXd growth_rate(const VectorXd& x, bool percent) {
  if (x.size() < 2) throw DomainError("growth_rate: need at least two levels");
  for (Index t = 0; t < x.size(); ++t) {
    if (!(x(t) > 0.0)) throw DomainError("growth_rate: levels must be strictly positive");
  }
  VectorXd g(x.size() - 1);
  for (Index t = 1; t < x.size(); ++t) g(t - 1) = std::log(x(t)) - std::log(x(t - 1));
  return percent ? VectorXd(100.0 * g) : g;
}

SeriesInput to_growth(const SeriesInput& s, bool percent) {
  SeriesInput g;
  g.actual = growth_rate(s.actual, percent);
  g.forecast = growth_rate(s.forecast, percent);
  g.periods.assign(s.periods.begin() + (s.periods.empty() ? 0 : 1), s.periods.end());
  return g;
}

// ---- instruments ----------------------------------------------------------

ForecastSample build_instruments(const VectorXd& actual, const VectorXd& forecast) {
  if (actual.size() != forecast.size()) {
    throw LengthMismatch("build_instruments: actual and forecast lengths differ");
  }
  const Index n = actual.size();
  const Index usable = n - 2;
  if (usable < 5) {
    throw TooShort("build_instruments: " + std::to_string(std::max<Index>(usable, 0)) +
                   " usable rows, need at least 5");
  }
  VectorXd e(usable);
  MatrixXd v(usable, 4);
  for (Index t = 2; t < n; ++t) {
    const Index r = t - 2;
    e(r) = actual(t) - forecast(t - 1);
    v(r, 0) = 1.0;
    v(r, 1) = std::abs(actual(t - 1) - forecast(t - 2));
    v(r, 2) = actual(t - 1) - actual(t - 2);
    v(r, 3) = forecast(t - 1) - forecast(t - 2);
  }
  return ForecastSample(e, v, instrument_names(), 1);
}

ForecastSample build_instruments(const SeriesInput& s) { return build_instruments(s.actual, s.forecast); }

// ---- forecast samples -----------------------------------------------------

void write_sample(std::ostream& out, const ForecastSample& sample) {
  out << "error";
  for (const auto& n : sample.names()) out << ',' << n;
  out << '\n';
  for (Index t = 0; t < sample.size(); ++t) {
    out << fmt17(sample.errors()(t));
    for (Index j = 0; j < sample.dim(); ++j) out << ',' << fmt17(sample.instruments()(t, j));
    out << '\n';
  }
}

ForecastSample load_sample(std::istream& in, const std::string& source) {
  const Table t = read_table(in, ',', source);
  const std::size_t je = find_column(t, "error", source);
  std::vector<std::size_t> cols;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (j == je) continue;
    cols.push_back(j);
    names.push_back(t.header[j]);
  }
  if (cols.empty()) throw ParseError(source + ": no instrument columns", 1, 1);
  const auto n = static_cast<Index>(t.rows.size());
  VectorXd e(n);
  MatrixXd v(n, static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto ii = static_cast<Index>(i);
    e(ii) = parse_cell(t, i, je, source);
    for (std::size_t k = 0; k < cols.size(); ++k) v(ii, static_cast<Index>(k)) = parse_cell(t, i, cols[k], source);
  }
  try {
    return ForecastSample(e, v, names, 1);
  } catch (const ConfigError& err) {
    throw DataError(source + ": " + err.what());
  }
}

ForecastSample load_sample(const std::string& path) {
  auto in = open(path);
  return load_sample(in, path);
}

bool is_sample_file(const std::string& path) {
  auto in = open(path);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    for (const auto& h : split(line, ',')) {
      if (h == "error") return true;
    }
    return false;
  }
  return false;
}

}  // namespace fr
