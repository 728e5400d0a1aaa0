// stpipe/types.h
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

#ifndef STPIPE_TYPES_H_
#define STPIPE_TYPES_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace stpipe {

// A sentence as an ordered list of surface tokens. Tokens are non-empty
// UTF-8 strings and never contain whitespace or NUL.
using TokenSequence = std::vector<std::string>;

inline std::string join_tokens(const TokenSequence &tokens,
                               const char *sep = " ") {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += sep;
    out += tokens[i];
  }
  return out;
}

// Splits on runs of ASCII whitespace; never yields empty tokens.
TokenSequence split_tokens(const std::string &line);

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

class EmptyCorpusError : public Error {
 public:
  explicit EmptyCorpusError(const std::string &msg = "empty corpus")
      : Error("EmptyCorpus: " + msg) {}
};

class DanglingMarkerError : public Error {
 public:
  explicit DanglingMarkerError(const std::string &msg)
      : Error("DanglingMarker: " + msg) {}
};

class AlignmentMismatchError : public Error {
 public:
  explicit AlignmentMismatchError(const std::string &msg)
      : Error("AlignmentMismatch: " + msg) {}
};

class InvalidNoiseModelError : public Error {
 public:
  explicit InvalidNoiseModelError(const std::string &msg)
      : Error("InvalidNoiseModel: " + msg) {}
};

class EmptyReferenceError : public Error {
 public:
  explicit EmptyReferenceError(const std::string &msg = "no reference tokens")
      : Error("EmptyReference: " + msg) {}
};

class AdapterProtocolViolationError : public Error {
 public:
  explicit AdapterProtocolViolationError(const std::string &msg)
      : Error("AdapterProtocolViolation: " + msg) {}
};

class AdapterFailureError : public Error {
 public:
  explicit AdapterFailureError(const std::string &msg)
      : Error("AdapterFailure: " + msg) {}
};

// Malformed model/config/corpus files.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string &msg) : Error("Parse: " + msg) {}
};

}  // namespace stpipe

#endif  // STPIPE_TYPES_H_
