#pragma once

namespace cwalk {

inline constexpr const char* kVersion = "0.1.0";

}
