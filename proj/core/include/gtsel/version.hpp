#pragma once

namespace gtsel {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gtsel
