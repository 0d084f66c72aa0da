#pragma once

#include <string>
#include <vector>

namespace ampcs {

std::vector<std::string> split_csv_line(const std::string& line);
/// Shortest round-trippable decimal form of v ("inf" for infinity).
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace ampcs
