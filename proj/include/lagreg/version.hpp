#pragma once

namespace lagreg {

inline constexpr const char* version = "0.1.0";

}
