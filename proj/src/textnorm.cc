// stpipe/textnorm.cc
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

#include "stpipe/textnorm.h"

#include <cstdint>

#include "stpipe/utf8.h"

namespace stpipe {

using utf8::CodePoint;

TokenSequence split_tokens(const std::string &line) {
  TokenSequence tokens;
  size_t i = 0;
  const size_t n = line.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::string normalize_punct(const std::string &raw) {
  std::string out;
  out.reserve(raw.size());
  size_t pos = 0;
  bool pending_space = false;
  bool at_start = true;
  auto emit = [&](const char *s) {
    if (pending_space && !at_start) out += ' ';
    pending_space = false;
    at_start = false;
    out += s;
  };
  while (pos < raw.size()) {
    CodePoint cp = utf8::decode(raw, pos);
    switch (cp) {
      case 0x2018:  // left single quote
      case 0x2019:  // right single quote
      case 0x201A:  // low single quote
      case 0x02BC:  // modifier apostrophe
        emit("'");
        break;
      case 0x201C:  // left double quote
      case 0x201D:  // right double quote
      case 0x201E:  // low double quote
        emit("\"");
        break;
      case 0x2010:  // hyphen
      case 0x2011:  // non-breaking hyphen
      case 0x2012:  // figure dash
      case 0x2013:  // en dash
      case 0x2014:  // em dash
      case 0x2015:  // horizontal bar
        emit("-");
        break;
      case 0x2026:  // ellipsis
        emit("...");
        break;
      case 0x00A0:  // no-break space
      case 0x2009:  // thin space
      case 0x202F:  // narrow no-break space
      case 0x3000:  // ideographic space
        pending_space = true;
        break;
      default:
        if (cp == '\0') break;  // strip NUL defensively
        if (cp < 0x80 && std::isspace(static_cast<int>(cp))) {
          pending_space = true;
        } else {
          std::string enc;
          utf8::encode(cp, enc);
          emit(enc.c_str());
        }
    }
  }
  return out;
}

namespace {

constexpr const char *kSplitChars = ".,!?;:()\"-";

bool is_split_char(CodePoint cp) {
  if (cp >= 0x80) return false;
  for (const char *p = kSplitChars; *p; ++p) {
    if (static_cast<CodePoint>(*p) == cp) return true;
  }
  return false;
}

// Marks periods that belong to a dotted acronym: at least two letter-period
// groups in a row, single letters only ("E.U.", "i.e.", "u.s.a.").
std::vector<bool> acronym_periods(const std::vector<CodePoint> &cps) {
  std::vector<bool> keep(cps.size(), false);
  size_t i = 0;
  while (i < cps.size()) {
    // Single letters only: the char before the first group must not be one.
    const bool start_ok = (i == 0) || !utf8::is_letter(cps[i - 1]);
    if (!start_ok || !utf8::is_letter(cps[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    size_t groups = 0;
    while (j + 1 < cps.size() && utf8::is_letter(cps[j]) &&
           cps[j + 1] == '.') {
      ++groups;
      j += 2;
    }
    if (groups >= 2) {
      for (size_t k = i + 1; k < j; k += 2) keep[k] = true;
      i = j;
    } else {
      ++i;
    }
  }
  return keep;
}

}  // namespace

TokenSequence tokenize(const std::string &raw) {
  TokenSequence tokens;
  for (const std::string &chunk : split_tokens(raw)) {
    const std::vector<CodePoint> cps = utf8::decode_all(chunk);
    const std::vector<bool> acro = acronym_periods(cps);
    std::vector<CodePoint> cur;
    auto flush = [&]() {
      if (!cur.empty()) {
        tokens.push_back(utf8::encode_all(cur));
        cur.clear();
      }
    };
    for (size_t i = 0; i < cps.size(); ++i) {
      CodePoint cp = cps[i];
      if (cp == '.') {
        bool decimal = i > 0 && i + 1 < cps.size() &&
                       utf8::is_ascii_digit(cps[i - 1]) &&
                       utf8::is_ascii_digit(cps[i + 1]);
        if (acro[i] || decimal) {
          cur.push_back(cp);
        } else {
          flush();
          tokens.push_back(".");
        }
      } else if (is_split_char(cp)) {
        flush();
        tokens.push_back(std::string(1, static_cast<char>(cp)));
      } else if (cp == '\'' && i > 0 && i + 1 < cps.size() &&
                 utf8::is_letter(cps[i - 1]) && utf8::is_letter(cps[i + 1])) {
        flush();
        cur.push_back(cp);
      } else {
        cur.push_back(cp);
      }
    }
    flush();
  }
  return tokens;
}

namespace {

bool is_clitic_token(const std::string &tok) {
  if (tok.size() < 2 || tok[0] != '\'') return false;
  size_t pos = 1;
  return utf8::is_letter(utf8::decode(tok, pos));
}

bool ends_with_letter(const std::string &tok) {
  const std::vector<CodePoint> cps = utf8::decode_all(tok);
  return !cps.empty() && utf8::is_letter(cps.back());
}

// A clitic reattaches only after a word-final letter; only there will
// tokenize split it off again.
bool no_space_before(const std::string &tok, const std::string &prev) {
  if (tok.size() == 1) {
    switch (tok[0]) {
      case '.': case ',': case '!': case '?':
      case ';': case ':': case ')':
        return true;
      default:
        return false;
    }
  }
  return is_clitic_token(tok) && ends_with_letter(prev);
}

}  // namespace

std::string detokenize(const TokenSequence &tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && tokens[i - 1] != "(" &&
        !no_space_before(tokens[i], tokens[i - 1])) {
      out += ' ';
    }
    out += tokens[i];
  }
  return out;
}

TokenSequence lowercase(const TokenSequence &tokens) {
  TokenSequence out;
  out.reserve(tokens.size());
  for (const std::string &tok : tokens) out.push_back(utf8::lowercase(tok));
  return out;
}

namespace {

// Characters strip_punct removes. Apostrophes are kept so that clitics and
// contractions survive into ASR-format text.
bool is_strippable(CodePoint cp) {
  if (cp < 0x80) {
    if (cp == '\'') return false;
    return std::ispunct(static_cast<int>(cp)) != 0;
  }
  switch (cp) {
    case 0x00A1: case 0x00BF:              // inverted ! and ?
    case 0x00A2: case 0x00A3: case 0x00A5: // cent, pound, yen
    case 0x00A7: case 0x00AB: case 0x00BB: // section sign, guillemets
    case 0x20AC:                           // euro
    case 0x2018: case 0x2019: case 0x201C: case 0x201D:
    case 0x2013: case 0x2014: case 0x2026:
      return true;
    default:
      return false;
  }
}

// ([letter].)+ with an optional trailing letter: "e.u.", "u.s.a", ...
bool is_dotted_acronym(const std::vector<CodePoint> &cps) {
  if (cps.size() < 3) return false;
  for (size_t i = 0; i < cps.size(); ++i) {
    if (i % 2 == 0) {
      if (!utf8::is_letter(cps[i])) return false;
    } else {
      if (cps[i] != '.') return false;
    }
  }
  return true;
}

}  // namespace

TokenSequence strip_punct(const TokenSequence &tokens) {
  TokenSequence out;
  for (const std::string &tok : tokens) {
    const std::vector<CodePoint> cps = utf8::decode_all(tok);
    if (is_dotted_acronym(cps)) {
      for (size_t i = 0; i < cps.size(); i += 2) {
        out.push_back(utf8::encode_all({cps[i]}));
      }
      continue;
    }
    std::vector<CodePoint> kept;
    bool all_punct = true;
    for (CodePoint cp : cps) {
      if (is_strippable(cp)) continue;
      if (cp != '\'') all_punct = false;
      kept.push_back(cp);
    }
    if (kept.empty() || all_punct) continue;
    out.push_back(utf8::encode_all(kept));
  }
  return out;
}

namespace {

const char *kUnits[] = {"zero", "one", "two",   "three", "four",
                        "five", "six", "seven", "eight", "nine"};
const char *kTeens[] = {"ten",      "eleven",  "twelve",  "thirteen",
                        "fourteen", "fifteen", "sixteen", "seventeen",
                        "eighteen", "nineteen"};
const char *kTens[] = {"",      "",      "twenty",  "thirty", "forty",
                       "fifty", "sixty", "seventy", "eighty", "ninety"};

void sub_hundred_to_words(uint64_t n, TokenSequence &out) {
  if (n < 10) {
    out.push_back(kUnits[n]);
  } else if (n < 20) {
    out.push_back(kTeens[n - 10]);
  } else {
    out.push_back(kTens[n / 10]);
    if (n % 10) out.push_back(kUnits[n % 10]);
  }
}

// 1..999, with "and" between the hundreds and a trailing sub-hundred part.
void group_to_words(uint64_t n, TokenSequence &out) {
  if (n >= 100) {
    out.push_back(kUnits[n / 100]);
    out.push_back("hundred");
    if (n % 100) {
      out.push_back("and");
      sub_hundred_to_words(n % 100, out);
    }
  } else {
    sub_hundred_to_words(n, out);
  }
}

}  // namespace

void number_to_words(uint64_t n, TokenSequence &out) {
  if (n == 0) {
    out.push_back("zero");
    return;
  }
  const uint64_t millions = n / 1000000;
  const uint64_t thousands = (n / 1000) % 1000;
  const uint64_t rest = n % 1000;
  bool higher = false;
  if (millions) {
    group_to_words(millions, out);
    out.push_back("million");
    higher = true;
  }
  if (thousands) {
    if (higher && thousands < 100 && rest == 0) out.push_back("and");
    group_to_words(thousands, out);
    out.push_back("thousand");
    higher = true;
  }
  if (rest) {
    // "and" before a final sub-hundred group: "two thousand and six".
    if (higher && rest < 100) out.push_back("and");
    group_to_words(rest, out);
  }
}

namespace {

bool all_digits(const std::string &tok) {
  if (tok.empty()) return false;
  for (char c : tok) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

void digits_to_words(const std::string &digits, TokenSequence &out) {
  for (char c : digits) out.push_back(kUnits[c - '0']);
}

}  // namespace

TokenSequence verbalize_numbers(const TokenSequence &tokens) {
  TokenSequence out;
  for (const std::string &tok : tokens) {
    if (all_digits(tok)) {
      // Leading zeros and numbers past the cardinal range read digit by
      // digit, like a spoken ID.
      if ((tok.size() > 1 && tok[0] == '0') || tok.size() > 9) {
        digits_to_words(tok, out);
      } else {
        number_to_words(std::stoull(tok), out);
      }
      continue;
    }
    size_t dot = tok.find('.');
    if (dot != std::string::npos && dot > 0 && dot + 1 < tok.size() &&
        all_digits(tok.substr(0, dot)) && all_digits(tok.substr(dot + 1))) {
      const std::string ipart = tok.substr(0, dot);
      if ((ipart.size() > 1 && ipart[0] == '0') || ipart.size() > 9) {
        digits_to_words(ipart, out);
      } else {
        number_to_words(std::stoull(ipart), out);
      }
      out.push_back("point");
      digits_to_words(tok.substr(dot + 1), out);
      continue;
    }
    out.push_back(tok);
  }
  return out;
}

}  // namespace stpipe
