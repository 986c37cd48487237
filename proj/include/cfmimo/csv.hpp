#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cfmimo {

/// Shortest round-trip decimal form (std::to_chars), so rewritten CSVs are
/// byte-identical and parse back exactly.
std::string format_double(double value);

double parse_double(std::string_view text);

/// FNV-1a 64-bit, used to stamp reports with a config fingerprint.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t value);

/// All report CSVs start with "# config_hash=... seed=..." followed by a
/// header row; the hash makes every file regenerable from its config alone.
void write_csv_preamble(std::ostream& os, std::uint64_t config_hash, std::uint64_t seed,
                        const std::vector<std::string>& columns);

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

/// Reads a numeric CSV, skipping '#' comment lines and one header row if
/// `header` is set. Column count must be consistent.
Eigen::MatrixXd read_matrix_csv(std::istream& is, bool header);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace cfmimo
