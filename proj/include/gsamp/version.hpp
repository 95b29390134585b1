#pragma once

namespace gsamp {

inline constexpr const char* kVersion = "0.1.0";

} // namespace gsamp
