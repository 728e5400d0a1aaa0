// stpipe/textnorm.h
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

#ifndef STPIPE_TEXTNORM_H_
#define STPIPE_TEXTNORM_H_

#include <string>

#include "stpipe/types.h"

namespace stpipe {

// Punctuation normalization applied before tokenization: curly quotes and
// apostrophes to ASCII ' and ", en/em dashes to "-", the ellipsis character
// to "...", non-breaking spaces to plain spaces; whitespace runs collapsed
// and the result trimmed. Total and idempotent.
std::string normalize_punct(const std::string &raw);

// Whitespace + punctuation tokenizer over normalized text. The characters
// . , ! ? ; : ( ) " - split into their own tokens, except
//   - periods inside dotted acronyms ("E.U." stays one token),
//   - decimal points between digits ("3.5" stays one token).
// An apostrophe between two letters starts a new token so clitics separate
// ("don't" -> "don" "'t"); other apostrophes stay attached.
TokenSequence tokenize(const std::string &raw);

// Joins tokens with single spaces, then drops the space before the
// punctuation tokens . , ! ? ; : ) and before clitics ('t, 's, ...), and
// after "(". Lossy inverse of tokenize on raw text, but
// tokenize(detokenize(t)) == t for any t produced by tokenize.
std::string detokenize(const TokenSequence &tokens);

TokenSequence lowercase(const TokenSequence &tokens);

// Drops tokens made solely of punctuation or currency/percent symbols,
// removes such characters inside mixed tokens (apostrophes are kept), and
// splits dotted acronyms into letter tokens ("e.u." -> "e" "u").
TokenSequence strip_punct(const TokenSequence &tokens);

// Replaces integer tokens with British-style cardinal words, one word per
// token ("2006" -> "two thousand and six"), decimals with integer part +
// "point" + digit names. Tokens mixing digits and letters pass through.
// Integer tokens with leading zeros or >= 10^9 are read out digit by digit.
TokenSequence verbalize_numbers(const TokenSequence &tokens);

// Cardinal words for 0 <= n < 10^9, appended to out.
void number_to_words(uint64_t n, TokenSequence &out);

}  // namespace stpipe

#endif  // STPIPE_TEXTNORM_H_
