#pragma once

// Minimal CSV writing: comma delimiter, LF line endings and 17 significant
// digits so every double reads back exactly.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace erl::cli {

/// Shortest "%.17g" rendering; non-finite values print as nan, inf, -inf.
std::string format_real(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& add(double x);
  CsvTable& add(std::uint64_t x);
  CsvTable& add(std::string_view text);
  /// Completes the current row; throws std::logic_error on a width mismatch.
  void end_row();

  std::size_t rows() const noexcept { return rows_; }
  const std::string& text() const noexcept { return text_; }

  /// Writes the table in binary mode; throws std::runtime_error on failure.
  void save(const std::filesystem::path& path) const;

 private:
  void push(std::string cell);

  std::size_t width_;
  std::size_t filled_ = 0;
  std::size_t rows_ = 0;
  std::string text_;
};

}  // namespace erl::cli
