#pragma once

namespace medmod {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace medmod
