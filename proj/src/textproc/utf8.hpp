#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace regstyle::text::utf8 {

/// Decodes UTF-8; malformed bytes decode to U+FFFD one byte at a time.
std::vector<char32_t> decode(std::string_view s);
void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_upper(char32_t cp);
char32_t fold(char32_t cp);

}  // namespace regstyle::text::utf8
