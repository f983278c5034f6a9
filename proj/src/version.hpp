#pragma once

namespace msm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace msm
