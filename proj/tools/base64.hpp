#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace tonelut_tools {

std::string base64_encode(std::string_view bytes);
/// Standard alphabet with padding; whitespace is ignored. Empty on any other
/// malformed input.
std::optional<std::string> base64_decode(std::string_view text);

}  // namespace tonelut_tools
