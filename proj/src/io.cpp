#include "dglm/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "dglm/errors.hpp"

namespace dglm {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path);
  return ss.str();
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = strip(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i)
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

}  // namespace

TimeSeries parse_csv_text(std::string_view text, const std::string& source) {
  TimeSeries series;
  std::size_t pos = 0;
  int lineno = 0;
  bool first = true;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const std::string_view line = strip(raw);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    long t = 0;
    const bool t_ok = parse_number(fields[0], t);
    if (first && !t_ok) {
      first = false;
      continue;  // header
    }
    first = false;
    const std::string where = source + ":" + std::to_string(lineno);
    if (fields.size() != 2) throw IoError(where + ": expected 2 fields (t,value), got " + std::to_string(fields.size()));
    if (!t_ok) throw IoError(where + ": cannot parse time index '" + std::string(strip(fields[0])) + "'");
    std::optional<double> y;
    if (!strip(fields[1]).empty()) {
      double v = 0.0;
      if (!parse_number(fields[1], v))
        throw IoError(where + ": cannot parse value '" + std::string(strip(fields[1])) + "'");
      y = v;
    }
    try {
      series.push_back(t, y);
    } catch (const ConfigError& e) {
      throw IoError(where + ": " + e.what());
    }
  }
  return series;
}

TimeSeries parse_csv(const std::string& path) { return parse_csv_text(read_file(path), path); }

std::string format_double(double x) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string format_series_csv(const TimeSeries& series) {
  std::string out = "t,y\n";
  for (const auto& o : series) {
    out += std::to_string(o.t);
    out += ',';
    if (o.y) out += format_double(*o.y);
    out += '\n';
  }
  return out;
}

void write_series_csv(const std::string& path, const TimeSeries& series) {
  write_file_atomic(path, format_series_csv(series));
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("error writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename " + tmp.string() + " to " + path);
  }
}

Eigen::MatrixXd read_trajectory_csv(const std::string& path, int state_dim) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    const auto fields = split_fields(strip(line));
    double probe = 0.0;
    if (first && !parse_number(fields[0], probe)) {
      first = false;
      continue;
    }
    first = false;
    if (static_cast<int>(fields.size()) != state_dim + 1)
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(state_dim + 1) + " fields");
    std::vector<double> row;
    for (int j = 1; j <= state_dim; ++j) {
      double v = 0.0;
      if (!parse_number(fields[static_cast<std::size_t>(j)], v))
        throw IoError(path + ":" + std::to_string(lineno) + ": cannot parse number");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd out(state_dim, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int j = 0; j < state_dim; ++j) out(j, static_cast<Eigen::Index>(t)) = rows[t][static_cast<std::size_t>(j)];
  return out;
}

}  // namespace dglm
