#pragma once

namespace fkup {

inline constexpr const char* kVersion = "fkup 0.1.0";

}
