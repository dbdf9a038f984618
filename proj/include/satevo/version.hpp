#pragma once

namespace satevo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace satevo
