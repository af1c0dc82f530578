#pragma once

namespace intragen {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace intragen
