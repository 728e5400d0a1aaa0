// stpipe/subprocess.h
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

#ifndef STPIPE_SUBPROCESS_H_
#define STPIPE_SUBPROCESS_H_

#include <string>
#include <vector>

#include "stpipe/types.h"

namespace stpipe {

struct SubprocessResult {
  int exit_code = -1;
  bool timed_out = false;
};

// Runs `sh -c command` with stdin/stdout redirected to the given files.
// timeout_s <= 0 means no timeout; a timed-out child is killed.
SubprocessResult run_command(const std::string &command,
                             const std::string &stdin_path,
                             const std::string &stdout_path,
                             double timeout_s = 0.0);

// Line-in/line-out adapter protocol around an external translator: feeds
// the sources one per line, expects exactly one output line each, in order.
// Throws AdapterFailureError on nonzero exit or timeout and
// AdapterProtocolViolationError on a line-count mismatch; both carry the
// partial output count.
std::vector<std::string> translate_external(
    const std::vector<std::string> &source_lines, const std::string &command,
    const std::string &work_dir, double timeout_s = 0.0);

}  // namespace stpipe

#endif  // STPIPE_SUBPROCESS_H_
