#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pvae::data {

/// Lowercases ASCII, splits on whitespace and splits . , ! ? ; : into their own tokens.
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

}  // namespace pvae::data
