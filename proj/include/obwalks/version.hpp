#pragma once

namespace obwalks {

inline constexpr const char* kVersion = "0.1.0";

} // namespace obwalks
