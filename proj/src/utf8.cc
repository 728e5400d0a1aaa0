// stpipe/utf8.cc
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

#include "stpipe/utf8.h"

namespace stpipe {
namespace utf8 {

CodePoint decode(std::string_view s, size_t &pos) {
  const auto byte = [&](size_t i) -> uint32_t {
    return static_cast<unsigned char>(s[i]);
  };
  uint32_t b0 = byte(pos);
  if (b0 < 0x80) {
    pos += 1;
    return b0;
  }
  auto cont = [&](size_t i) {
    return i < s.size() && (byte(i) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
    CodePoint cp = ((b0 & 0x1F) << 6) | (byte(pos + 1) & 0x3F);
    pos += 2;
    return cp >= 0x80 ? cp : kReplacement;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
    CodePoint cp = ((b0 & 0x0F) << 12) | ((byte(pos + 1) & 0x3F) << 6) |
                   (byte(pos + 2) & 0x3F);
    pos += 3;
    return cp >= 0x800 ? cp : kReplacement;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
    CodePoint cp = ((b0 & 0x07) << 18) | ((byte(pos + 1) & 0x3F) << 12) |
                   ((byte(pos + 2) & 0x3F) << 6) | (byte(pos + 3) & 0x3F);
    pos += 4;
    return (cp >= 0x10000 && cp <= 0x10FFFF) ? cp : kReplacement;
  }
  pos += 1;
  return kReplacement;
}

void encode(CodePoint cp, std::string &out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::vector<CodePoint> decode_all(std::string_view s) {
  std::vector<CodePoint> cps;
  cps.reserve(s.size());
  size_t pos = 0;
  while (pos < s.size()) cps.push_back(decode(s, pos));
  return cps;
}

std::string encode_all(const std::vector<CodePoint> &cps) {
  std::string out;
  out.reserve(cps.size());
  for (CodePoint cp : cps) encode(cp, out);
  return out;
}

CodePoint to_lower(CodePoint cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  // Latin-1 Supplement uppercase, skipping the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  // Latin Extended-A comes mostly in upper/lower pairs.
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x139 && cp <= 0x148) {
    return (cp % 2 == 1) ? cp + 1 : cp;
  }
  if (cp == 0x178) return 0xFF;  // Y with diaeresis
  if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
  return cp;
}

CodePoint to_upper(CodePoint cp) {
  if (cp >= 'a' && cp <= 'z') return cp - 32;
  // 0xDF is sharp s, whose uppercase is not a single code point; keep it.
  if (cp >= 0xE0 && cp <= 0xFE && cp != 0xF7) return cp - 32;
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
    return (cp % 2 == 1) ? cp - 1 : cp;
  }
  if (cp >= 0x139 && cp <= 0x148) {
    return (cp % 2 == 0) ? cp - 1 : cp;
  }
  if (cp == 0xFF) return 0x178;
  if (cp == 0x17A || cp == 0x17C || cp == 0x17E) return cp - 1;
  return cp;
}

bool is_ascii_digit(CodePoint cp) { return cp >= '0' && cp <= '9'; }

bool is_letter(CodePoint cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
  if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;
  if (cp >= 0x100 && cp <= 0x17F) return true;
  return false;
}

std::string lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t pos = 0;
  while (pos < s.size()) encode(to_lower(decode(s, pos)), out);
  return out;
}

}  // namespace utf8
}  // namespace stpipe
