#pragma once

namespace flowlab {

inline constexpr const char* version_string = "0.1.0";

} // namespace flowlab
