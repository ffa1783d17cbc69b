#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hopqa::text {

// Invalid UTF-8 sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

std::string_view trim(std::string_view s) noexcept;

// Lowercased maximal runs of letters and digits. Used for lexical indexing.
std::vector<std::string> word_tokens(std::string_view s);

}  // namespace hopqa::text
