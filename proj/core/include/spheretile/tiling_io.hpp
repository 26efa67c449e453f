#pragma once

#include <string>

#include "spheretile/tiling.hpp"

namespace spheretile {

inline constexpr const char* kTilingFormat = "tiling/v1";
inline constexpr const char* kToolVersion = "spheretile 0.1.0";

/// Canonical JSON text for a tiling. Canonical means: fixed key order, one
/// indentation style, shortest round-trip decimal numbers, and the
/// annotations block emitted only when it carries information. Parsing a
/// canonical file and serializing it again reproduces the bytes exactly.
std::string serialize_tiling(const SphericalTiling& s);

/// Inverse of serialize_tiling; accepts any key order and whitespace.
/// Throws MalformedTiling on schema violations (missing or mistyped fields,
/// unknown format tag, dangling references).
SphericalTiling parse_tiling(const std::string& text);

void write_tiling_file(const SphericalTiling& s, const std::string& path);
SphericalTiling read_tiling_file(const std::string& path);

}  // namespace spheretile
