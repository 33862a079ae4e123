// Copyright 2026 The annolex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Byte-level text helpers. Everything here is ASCII-case-aware and treats any
// byte >= 0x80 as part of a word, so UTF-8 text passes through untouched.
namespace annolex::text {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}
inline bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_ascii_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_alpha(char c) {
  return is_ascii_upper(c) || is_ascii_lower(c);
}
/// Letters, digits and non-ASCII bytes.
inline bool is_word_byte(char c) {
  return is_ascii_alpha(c) || is_ascii_digit(c) ||
         static_cast<unsigned char>(c) >= 0x80;
}
inline char to_lower(char c) {
  return is_ascii_upper(c) ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

/// Splits on runs of ASCII whitespace; no empty tokens.
std::vector<std::string_view> split_whitespace(std::string_view s);

/// Maximal runs of word bytes, lowercased. Apostrophes and all other ASCII
/// punctuation separate tokens.
std::vector<std::string> word_tokens(std::string_view s);

/// Replaces every whitespace run with one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

/// Decodes one UTF-8 code point at `pos`, advancing `pos`. Invalid or
/// truncated sequences yield 0xFFFD and advance by one byte.
std::uint32_t decode_utf8(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, std::uint32_t cp);

/// C0/C1 controls and DEL.
inline bool is_control_cp(std::uint32_t cp) {
  return cp < 0x20 || (cp >= 0x7f && cp < 0xa0);
}

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace annolex::text
