#include "erl/cli/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace erl::cli {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) {
  for (auto& h : header) push(std::move(h));
  end_row();
  rows_ = 0;
}

CsvTable& CsvTable::add(double x) {
  push(format_real(x));
  return *this;
}

CsvTable& CsvTable::add(std::uint64_t x) {
  push(std::to_string(x));
  return *this;
}

CsvTable& CsvTable::add(std::string_view text) {
  if (text.find_first_of(",\"\n") != std::string_view::npos)
    throw std::logic_error("CSV cell needs quoting: " + std::string(text));
  push(std::string(text));
  return *this;
}

void CsvTable::push(std::string cell) {
  if (filled_ == width_) throw std::logic_error("CSV row has too many cells");
  if (filled_ > 0) text_ += ',';
  text_ += cell;
  ++filled_;
}

void CsvTable::end_row() {
  if (filled_ != width_) throw std::logic_error("CSV row has too few cells");
  text_ += '\n';
  filled_ = 0;
  ++rows_;
}

void CsvTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text_;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace erl::cli
