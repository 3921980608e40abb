#pragma once

#include <string>
#include <vector>

namespace verafi {

// Lowercase, split on non-alphanumeric runs, keep digit tokens.
std::vector<std::string> tokenize(const std::string& text);

}  // namespace verafi
