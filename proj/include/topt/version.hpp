#pragma once

namespace topt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace topt
