#pragma once

#include <string>
#include <string_view>

namespace canontok {

// Throws ParseError on malformed UTF-8 or surrogate code points.
std::u32string utf8_to_u32(std::string_view utf8);

std::string u32_to_utf8(std::u32string_view text);
std::string u32_to_utf8(char32_t c);

// Printable form for error messages: the character itself plus U+XXXX.
std::string describe_char(char32_t c);

}  // namespace canontok
