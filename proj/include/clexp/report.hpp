#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "clexp/common.hpp"

namespace clexp {

/// Bit-stable CSV writer: fixed column order, 17-significant-digit floats,
/// LF line endings.
class CsvWriter {
public:
  using Cell = std::variant<std::string, double, long long, unsigned long long, bool>;

  explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<Cell> cells);
  /// Serialized document, header included.
  std::string str() const;
  void write(const std::filesystem::path& file) const;

  static std::string format_cell(const Cell& c);

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_double(double v);  // %.17g

/// Writes bytes exactly (binary mode) and returns the FNV-1a digest.
std::uint64_t write_file(const std::filesystem::path& file, const std::string& bytes);

std::string read_file(const std::filesystem::path& file);

}  // namespace clexp
