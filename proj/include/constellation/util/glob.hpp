#pragma once

#include <string_view>

namespace constellation {

// Shell-style match: '*' any run, '?' one character. No character classes.
bool glob_match(std::string_view pattern, std::string_view text) noexcept;

}  // namespace constellation
