#pragma once

namespace planck2d {

inline constexpr int version_major = 1;
inline constexpr int version_minor = 0;
inline constexpr int version_patch = 0;
inline constexpr const char* version_string = "1.0.0";

// Bumped whenever the on-disk CSV/JSON layouts change shape.
inline constexpr int dataset_format_version = 1;
inline constexpr int report_format_version = 1;

} // namespace planck2d
