#pragma once

namespace mbfs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mbfs
