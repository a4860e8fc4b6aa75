#pragma once

namespace smalldev {

inline constexpr const char* version = "0.1.0";

} // namespace smalldev
