#pragma once

namespace opttomo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace opttomo
