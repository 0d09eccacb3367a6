#ifndef STREE_REPORT_HPP
#define STREE_REPORT_HPP

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace stree {

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// Shortest round-trip decimal form of x.
std::string num(double x);

/// "# key = value" lines with the library version first.
void write_header_block(std::ostream& os, const ConfigEcho& config);

/// Joins cells with commas and ends the line.
void write_csv_row(std::ostream& os, const std::vector<std::string>& cells);

}  // namespace stree

#endif  // STREE_REPORT_HPP
