// stpipe/utf8.h
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABILITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef STPIPE_UTF8_H_
#define STPIPE_UTF8_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stpipe {
namespace utf8 {

using CodePoint = uint32_t;

constexpr CodePoint kReplacement = 0xFFFD;

// Decodes the code point starting at s[pos] and advances pos past it.
// Invalid bytes decode to kReplacement and consume one byte.
CodePoint decode(std::string_view s, size_t &pos);

void encode(CodePoint cp, std::string &out);

std::vector<CodePoint> decode_all(std::string_view s);

std::string encode_all(const std::vector<CodePoint> &cps);

// Case folding for Basic Latin, Latin-1 Supplement and Latin Extended-A,
// which covers the English/German (and general Western European) surface
// text this toolkit processes. Other code points pass through.
CodePoint to_lower(CodePoint cp);
CodePoint to_upper(CodePoint cp);

bool is_ascii_digit(CodePoint cp);
// Letters in the ranges handled by to_lower/to_upper.
bool is_letter(CodePoint cp);

std::string lowercase(std::string_view s);

}  // namespace utf8
}  // namespace stpipe

#endif  // STPIPE_UTF8_H_
