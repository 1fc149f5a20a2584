#pragma once

namespace sniftle {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sniftle
