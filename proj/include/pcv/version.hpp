#pragma once

namespace pcv {

inline constexpr const char* version = "1.0.0";

}  // namespace pcv
