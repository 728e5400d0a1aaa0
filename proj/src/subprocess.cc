// stpipe/subprocess.cc
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

#include "stpipe/subprocess.h"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "stpipe/corpus.h"

namespace stpipe {

SubprocessResult run_command(const std::string &command,
                             const std::string &stdin_path,
                             const std::string &stdout_path,
                             double timeout_s) {
  SubprocessResult result;
  pid_t pid = fork();
  if (pid < 0) throw Error("fork failed");
  if (pid == 0) {
    // Own process group so a timeout can take the whole command tree down.
    setpgid(0, 0);
    int in_fd = open(stdin_path.c_str(), O_RDONLY);
    int out_fd =
        open(stdout_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (in_fd < 0 || out_fd < 0) _exit(127);
    dup2(in_fd, STDIN_FILENO);
    dup2(out_fd, STDOUT_FILENO);
    close(in_fd);
    close(out_fd);
    execl("/bin/sh", "sh", "-c", command.c_str(), nullptr);
    _exit(127);
  }

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_s);
  int status = 0;
  while (true) {
    pid_t done = waitpid(pid, &status, timeout_s > 0 ? WNOHANG : 0);
    if (done == pid) break;
    if (done < 0) throw Error("waitpid failed");
    if (timeout_s > 0 && std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      return result;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  }
  return result;
}

std::vector<std::string> translate_external(
    const std::vector<std::string> &source_lines, const std::string &command,
    const std::string &work_dir, double timeout_s) {
  const std::string in_path = work_dir + "/adapter.in";
  const std::string out_path = work_dir + "/adapter.out";
  write_lines(in_path, source_lines);

  SubprocessResult run = run_command(command, in_path, out_path, timeout_s);
  std::vector<std::string> output;
  try {
    output = read_lines(out_path);
  } catch (const Error &) {
    // fall through with empty partial output
  }
  if (run.timed_out) {
    throw AdapterFailureError("adapter '" + command + "' timed out after " +
                              std::to_string(timeout_s) + "s with " +
                              std::to_string(output.size()) +
                              " lines written");
  }
  if (run.exit_code != 0) {
    throw AdapterFailureError("adapter '" + command + "' exited with " +
                              std::to_string(run.exit_code) + " after " +
                              std::to_string(output.size()) +
                              " lines written");
  }
  if (output.size() != source_lines.size()) {
    throw AdapterProtocolViolationError(
        "adapter '" + command + "' wrote " + std::to_string(output.size()) +
        " lines for " + std::to_string(source_lines.size()) + " inputs");
  }
  return output;
}

}  // namespace stpipe
