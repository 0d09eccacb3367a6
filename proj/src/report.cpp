#include "stree/report.hpp"

#include <charconv>
#include <cmath>

#include "stree/common.hpp"

namespace stree {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_header_block(std::ostream& os, const ConfigEcho& config) {
  os << "# stree " << kVersion << "\n";
  for (const auto& [k, v] : config) os << "# " << k << " = " << v << "\n";
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

}  // namespace stree
