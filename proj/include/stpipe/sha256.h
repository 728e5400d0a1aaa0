// stpipe/sha256.h
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

#ifndef STPIPE_SHA256_H_
#define STPIPE_SHA256_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace stpipe {

// FIPS 180-4 SHA-256. Used for manifest input/output hashes.
class Sha256 {
 public:
  Sha256();
  void update(const void *data, size_t len);
  void update(std::string_view s) { update(s.data(), s.size()); }
  // Finalizes and returns the lowercase hex digest; the object must not be
  // updated afterwards.
  std::string hex_digest();

 private:
  void process_block(const uint8_t *block);

  uint32_t state_[8];
  uint64_t total_ = 0;
  uint8_t buffer_[64];
  size_t buffered_ = 0;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string &path);

}  // namespace stpipe

#endif  // STPIPE_SHA256_H_
