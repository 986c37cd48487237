#include "cfmimo/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cfmimo {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::runtime_error("cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

void write_csv_preamble(std::ostream& os, std::uint64_t config_hash, std::uint64_t seed,
                        const std::vector<std::string>& columns) {
  os << "# config_hash=" << hex64(config_hash) << " seed=" << seed << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) os << ',';
    os << columns[i];
  }
  os << '\n';
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_double(m(r, c));
    }
    os << '\n';
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

Eigen::MatrixXd read_matrix_csv(std::istream& is, bool header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header_pending = header;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cells = split_csv_line(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) row.push_back(parse_double(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("csv: inconsistent column count at data row " +
                               std::to_string(rows.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return m;
}

}  // namespace cfmimo
