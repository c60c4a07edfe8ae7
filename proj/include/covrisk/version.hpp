#pragma once

namespace covrisk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace covrisk
