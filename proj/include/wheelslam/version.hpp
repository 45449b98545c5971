#pragma once

namespace wheelslam {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wheelslam
