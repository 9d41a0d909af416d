#include "lichflow/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lichflow/error.hpp"
#include "lichflow/heatflow.hpp"

namespace lichflow::io {

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view token) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) token.remove_suffix(1);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw Error("not a number: '" + std::string(token) + "'");
  }
  return value;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return lines;
}

}  // namespace

std::string format_table(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw Error("table row width does not match the header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_table(const Table& table, const std::filesystem::path& path) { write_text(path, format_table(table)); }

Table read_table(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error("'" + path.string() + "' has no header row");
  Table t;
  for (auto col : split(lines[0], ',')) t.columns.emplace_back(col);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<double> row;
    for (auto cell : split(lines[i], ',')) row.push_back(parse_double(cell));
    if (row.size() != t.columns.size()) {
      throw Error("'" + path.string() + "' line " + std::to_string(i + 1) + " has the wrong number of columns");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

Table series_table(const std::vector<TrajectoryRecord>& records) {
  Table t;
  for (auto col : split(kSeriesHeader, ',')) t.columns.emplace_back(col);
  for (const auto& r : records) {
    t.rows.push_back({r.t, r.dt, r.min_u, r.max_u, r.energy, r.residual_l2, r.residual_linf, r.dudt_l2});
  }
  return t;
}

}  // namespace

std::string format_series(const std::vector<TrajectoryRecord>& records) {
  return format_table(series_table(records));
}

void write_series(const std::vector<TrajectoryRecord>& records, const std::filesystem::path& path) {
  write_text(path, format_series(records));
}

std::vector<TrajectoryRecord> read_series(const std::filesystem::path& path) {
  const Table t = read_table(path);
  std::string header;
  for (std::size_t c = 0; c < t.columns.size(); ++c) header += (c ? "," : "") + t.columns[c];
  if (header != kSeriesHeader) throw Error("'" + path.string() + "' is not a series file");
  std::vector<TrajectoryRecord> out;
  for (const auto& r : t.rows) out.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7]});
  return out;
}

std::string format_snapshot(const Field& field) {
  const Grid& g = field.grid();
  std::string out(kSnapshotMagic);
  out += "\ndim " + std::to_string(g.dim()) + "\npoints_per_axis";
  for (int a = 0; a < g.dim(); ++a) out += ' ' + std::to_string(g.points(a));
  out += "\naxis_length";
  for (int a = 0; a < g.dim(); ++a) out += ' ' + format_double(g.length(a));
  out += '\n';
  for (double v : field.values()) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

void write_snapshot(const Field& field, const std::filesystem::path& path) {
  write_text(path, format_snapshot(field));
}

Field parse_snapshot(std::string_view text, const std::string& origin) {
  const auto lines = lines_of(text);
  auto fail = [&](std::size_t line, const std::string& msg) -> Error {
    return Error(origin + ":" + std::to_string(line) + ": " + msg);
  };
  if (lines.size() < 4 || lines[0] != kSnapshotMagic) throw fail(1, "missing '" + std::string(kSnapshotMagic) + "' header");

  auto keyed = [&](std::size_t idx, std::string_view key) {
    auto parts = split(lines[idx], ' ');
    if (parts.empty() || parts[0] != key) throw fail(idx + 1, "expected '" + std::string(key) + "'");
    parts.erase(parts.begin());
    return parts;
  };
  const auto dim_parts = keyed(1, "dim");
  if (dim_parts.size() != 1) throw fail(2, "dim takes one value");
  const int dim = static_cast<int>(parse_double(dim_parts[0]));
  std::vector<int> points;
  for (auto p : keyed(2, "points_per_axis")) points.push_back(static_cast<int>(parse_double(p)));
  std::vector<double> lengths;
  for (auto l : keyed(3, "axis_length")) lengths.push_back(parse_double(l));
  const Grid g = make_grid(dim, points, lengths);

  if (lines.size() - 4 != g.size()) {
    throw fail(lines.size(), "expected " + std::to_string(g.size()) + " values, found " +
                                 std::to_string(lines.size() - 4));
  }
  std::vector<double> values;
  values.reserve(g.size());
  for (std::size_t i = 4; i < lines.size(); ++i) {
    try {
      values.push_back(parse_double(lines[i]));
    } catch (const Error& e) {
      throw fail(i + 1, e.what());
    }
  }
  return Field(g, std::move(values));
}

Field read_snapshot(const std::filesystem::path& path) { return parse_snapshot(read_text(path), path.string()); }

}  // namespace lichflow::io
