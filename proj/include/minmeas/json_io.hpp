#pragma once

// Small helpers for the hand-written JSON/CSV output. Reading goes through
// nlohmann::json; writing is done by hand so every double is emitted with
// 17 significant digits (round-trips bit-exactly).

#include <string>
#include <string_view>

namespace minmeas::io {

/// "%.17g"
std::string fmt17(double v);
/// Fixed 6 significant digits for human-facing tables.
std::string fmt6(double v);
/// Quoted and escaped JSON string.
std::string quote(std::string_view s);

}  // namespace minmeas::io
