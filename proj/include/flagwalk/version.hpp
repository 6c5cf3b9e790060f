#pragma once

namespace flagwalk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace flagwalk
