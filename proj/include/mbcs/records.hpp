#pragma once

// CSV serialization of sweep records, golden-file reading and atomic writes.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mbcs/analysis.hpp"

namespace mbcs {

inline constexpr const char* kCsvHeader =
    "run_id,dimension,n_bands,lambda,kappa,tc,tc_found,min_eig_at_tc,channel,grid_points,iterations,log_ratio";

/// Header plus one row per record; floats with 17 significant digits.
void emit_csv(std::ostream& os, const std::vector<SweepRecord>& records);
std::string emit_csv(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> parse_csv(std::istream& is);
std::vector<SweepRecord> parse_csv(const std::string& text);

/// Sorts by (lambda, kappa, run_id).
void sort_records(std::vector<SweepRecord>& records);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct GoldenEntry {
  std::string model_id;
  std::string quantity;
  double value = 0.0;
  double oracle_err = 0.0;
};

std::vector<GoldenEntry> read_golden(const std::filesystem::path& path);
std::string format_double(double x);

}  // namespace mbcs
