#pragma once

namespace lejaq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lejaq
