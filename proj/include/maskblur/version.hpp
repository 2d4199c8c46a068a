#pragma once

namespace maskblur {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace maskblur
