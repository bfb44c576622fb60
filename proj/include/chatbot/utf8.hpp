#ifndef CHATBOT_UTF8_HPP_
#define CHATBOT_UTF8_HPP_

#include <string>
#include <string_view>

namespace chatbot::utf8 {

/// Decodes UTF-8 into code points. Invalid sequences decode to U+FFFD.
std::u32string decode(std::string_view text);

std::string encode(char32_t code_point);
std::string encode(std::u32string_view code_points);

/// Lowercases ASCII letters only; everything else passes through.
inline char32_t ascii_lower(char32_t c) noexcept { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

}  // namespace chatbot::utf8

#endif  // CHATBOT_UTF8_HPP_
