#pragma once

namespace ddeid {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ddeid
