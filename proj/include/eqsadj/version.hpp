#pragma once

namespace eqsadj {
inline constexpr const char* version = "0.1.0";
}
