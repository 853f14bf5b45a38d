#pragma once

namespace innerdyn {

inline constexpr const char* library_version = "1.0.0";

}
