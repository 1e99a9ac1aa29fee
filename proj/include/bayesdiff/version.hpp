#pragma once

#include <cstdint>

namespace bayesdiff {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr uint64_t kDefaultSeed = 20260817ull;

}  // namespace bayesdiff
