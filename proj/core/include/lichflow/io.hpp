#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lichflow/field.hpp"

namespace lichflow {

struct TrajectoryRecord;

namespace io {

inline constexpr std::string_view kSnapshotMagic = "lichflow-snapshot v1";
inline constexpr std::string_view kSeriesHeader =
    "t,dt,min_u,max_u,energy,residual_l2,residual_linf,dudt_l2";

/// 17 significant digits, locale independent; round-trips every double.
std::string format_double(double value);
/// Strict locale-independent parse of a whole token. Throws on trailing junk.
double parse_double(std::string_view token);

/// Delimited table with a header row, LF line endings.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string format_table(const Table& table);
void write_table(const Table& table, const std::filesystem::path& path);
Table read_table(const std::filesystem::path& path);

std::string format_series(const std::vector<TrajectoryRecord>& records);
void write_series(const std::vector<TrajectoryRecord>& records, const std::filesystem::path& path);
std::vector<TrajectoryRecord> read_series(const std::filesystem::path& path);

std::string format_snapshot(const Field& field);
void write_snapshot(const Field& field, const std::filesystem::path& path);
Field parse_snapshot(std::string_view text, const std::string& origin = "<snapshot>");
Field read_snapshot(const std::filesystem::path& path);

/// Writes text to path, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace io
}  // namespace lichflow
