#pragma once

namespace rpvbayes {

inline constexpr const char* kToolName = "rpvbayes";
inline constexpr const char* kVersion = "1.0.0";

}  // namespace rpvbayes
