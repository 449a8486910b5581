#pragma once

#include <string>
#include <vector>

namespace flowlab {

// round-trip-faithful decimal rendering (%.17g)
std::string format_double(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

} // namespace flowlab
