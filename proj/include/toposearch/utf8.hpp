// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace toposearch::utf8 {

/// Decode UTF-8 into Unicode scalar values. Invalid sequences decode to U+FFFD.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

/// Number of Unicode scalar values (the unit of every offset in this library).
std::size_t length(std::string_view text);

/// Simple one-to-one lowercase mapping covering Latin, Latin-1, Latin Extended-A,
/// Greek and Cyrillic (including the Tatar letters). Other code points pass through.
char32_t to_lower(char32_t cp);
std::u32string to_lower(std::u32string_view text);
std::string to_lower(std::string_view text);

bool is_digit(char32_t cp);
bool is_letter(char32_t cp);
bool is_space(char32_t cp);

/// Substring by scalar-value offset and length.
std::string substr(std::string_view text, std::size_t start, std::size_t count);

/// Scalar-value offset of the first occurrence of needle at or after `from`
/// (also a scalar offset), or npos.
std::size_t find(std::string_view haystack, std::string_view needle, std::size_t from = 0);

} // namespace toposearch::utf8
