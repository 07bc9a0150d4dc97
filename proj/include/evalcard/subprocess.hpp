// Copyright 2026 The Evalcard Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// A child process with line-oriented pipes on stdin and stdout. stderr is
// collected in the background of every read so the child can never block on
// a full stderr pipe.

#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evalcard/error.hpp"

extern char** environ;

namespace evalcard {

class ChildProcess {
 public:
  using Clock = std::chrono::steady_clock;

  enum class ReadStatus { kLine, kTimeout, kEof };

  ChildProcess() = default;
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ~ChildProcess() { terminate(); }

  /// Starts argv[0] (looked up on PATH) with the remaining arguments.
  /// Throws ScorerUnavailable when the program cannot be started.
  void spawn(const std::vector<std::string>& argv) {
    if (argv.empty()) throw ScorerUnavailable("empty scorer command");
    terminate();
    // A dead child must surface as EPIPE on write, not kill the parent.
    ::signal(SIGPIPE, SIG_IGN);

    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 ||
        ::pipe2(err_pipe, O_CLOEXEC) != 0)
      throw ScorerUnavailable(std::string("pipe: ") + std::strerror(errno));

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_t pid = -1;
    const int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(),
                                  environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    if (rc != 0) {
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      ::close(err_pipe[0]);
      throw ScorerUnavailable("cannot start '" + argv[0] +
                              "': " + std::strerror(rc));
    }
    pid_ = pid;
    stdin_fd_ = in_pipe[1];
    stdout_fd_ = out_pipe[0];
    stderr_fd_ = err_pipe[0];
    stdout_buffer_.clear();
    stderr_text_.clear();
    stdout_eof_ = false;
  }

  bool running() const { return pid_ > 0; }

  /// Writes one line (a trailing "\n" is appended). Returns false if the
  /// child's stdin is closed. Safe to call from one writer thread while
  /// another thread reads.
  bool write_line(std::string_view line) {
    std::lock_guard<std::mutex> lock(write_mutex_);
    if (stdin_fd_ < 0) return false;
    std::string data(line);
    data.push_back('\n');
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(stdin_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  void close_stdin() {
    std::lock_guard<std::mutex> lock(write_mutex_);
    if (stdin_fd_ >= 0) ::close(stdin_fd_);
    stdin_fd_ = -1;
  }

  /// Reads the next stdout line (without "\n") or gives up at `deadline`.
  ReadStatus read_line(std::string& line, Clock::time_point deadline) {
    while (true) {
      const auto nl = stdout_buffer_.find('\n');
      if (nl != std::string::npos) {
        line = stdout_buffer_.substr(0, nl);
        stdout_buffer_.erase(0, nl + 1);
        return ReadStatus::kLine;
      }
      if (stdout_eof_) return ReadStatus::kEof;

      const auto now = Clock::now();
      if (now >= deadline) return ReadStatus::kTimeout;
      const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - now);

      pollfd fds[2] = {{stdout_fd_, POLLIN, 0}, {stderr_fd_, POLLIN, 0}};
      const nfds_t count = stderr_fd_ >= 0 ? 2 : 1;
      const int rc = ::poll(fds, count, static_cast<int>(wait.count()) + 1);
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ScorerUnavailable(std::string("poll: ") + std::strerror(errno));
      }
      if (count == 2 && (fds[1].revents & (POLLIN | POLLHUP))) drain_stderr();
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        char buf[4096];
        const ssize_t n = ::read(stdout_fd_, buf, sizeof(buf));
        if (n > 0) {
          stdout_buffer_.append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || errno != EINTR) {
          stdout_eof_ = true;
        }
      }
    }
  }

  /// Everything the child has written to stderr so far.
  std::string stderr_text() {
    while (stderr_fd_ >= 0) {
      pollfd fd{stderr_fd_, POLLIN, 0};
      if (::poll(&fd, 1, 0) <= 0 || !(fd.revents & (POLLIN | POLLHUP))) break;
      if (!drain_stderr()) break;
    }
    return stderr_text_;
  }

  /// Sends SIGKILL without waiting; a writer blocked on the child's stdin
  /// then fails with EPIPE.
  void kill() {
    if (pid_ > 0) ::kill(pid_, SIGKILL);
  }

  /// Closes stdin, waits briefly for a clean exit, then kills the child.
  /// Returns the exit status (or -1 when there was no child).
  int terminate(std::chrono::milliseconds grace = std::chrono::milliseconds(500)) {
    if (pid_ <= 0) return -1;
    close_stdin();
    int status = 0;
    const auto deadline = Clock::now() + grace;
    pid_t rc = 0;
    while ((rc = ::waitpid(pid_, &status, WNOHANG)) == 0 &&
           Clock::now() < deadline)
      ::usleep(2000);
    if (rc == 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
    pid_ = -1;
    for (int* fd : {&stdout_fd_, &stderr_fd_}) {
      if (*fd >= 0) ::close(*fd);
      *fd = -1;
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

 private:
  bool drain_stderr() {
    char buf[4096];
    const ssize_t n = ::read(stderr_fd_, buf, sizeof(buf));
    if (n > 0) {
      // Keep the last 64 KiB.
      stderr_text_.append(buf, static_cast<std::size_t>(n));
      if (stderr_text_.size() > 64 * 1024)
        stderr_text_.erase(0, stderr_text_.size() - 64 * 1024);
      return true;
    }
    if (n == 0) {
      ::close(stderr_fd_);
      stderr_fd_ = -1;
    }
    return false;
  }

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int stderr_fd_ = -1;
  std::string stdout_buffer_;
  std::string stderr_text_;
  bool stdout_eof_ = false;
  std::mutex write_mutex_;
};

}  // namespace evalcard
