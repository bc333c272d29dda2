// SPDX-License-Identifier: Apache-2.0
#include "ttscale/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "ttscale/errors.hpp"

namespace ttscale {

namespace {

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fds[0] >= 0) ::close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) ::close(fds[1]);
    fds[1] = -1;
  }
};

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                          double timeout_s) {
  if (argv.empty()) throw Error("run_process: empty command");
  // A child that exits before reading its input must not take us down.
  static const bool sigpipe_ignored = (::signal(SIGPIPE, SIG_IGN), true);
  (void)sigpipe_ignored;
  Pipe in, out, err, status;
  const auto start = std::chrono::steady_clock::now();

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::signal(SIGPIPE, SIG_DFL);  // ignored dispositions survive exec
    ::dup2(in.fds[0], STDIN_FILENO);
    ::dup2(out.fds[1], STDOUT_FILENO);
    ::dup2(err.fds[1], STDERR_FILENO);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    const int code = errno;
    [[maybe_unused]] auto ignored = ::write(status.fds[1], &code, sizeof code);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  in.close_read();
  out.close_write();
  err.close_write();
  status.close_write();

  ProcessResult result;
  {
    int code = 0;
    if (::read(status.fds[0], &code, sizeof code) == static_cast<ssize_t>(sizeof code)) {
      result.spawn_failed = true;
      result.stderr_text = std::string("exec failed: ") + std::strerror(code);
    }
  }

  ::fcntl(in.fds[1], F_SETFL, O_NONBLOCK);
  std::size_t written = 0;
  if (input.empty()) in.close_write();

  const auto deadline = start + std::chrono::duration<double>(timeout_s);
  char buffer[65536];
  while (out.fds[0] >= 0 || err.fds[0] >= 0) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      break;
    }
    const int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count()) + 1;
    pollfd fds[3];
    int n = 0;
    int out_slot = -1, err_slot = -1, in_slot = -1;
    if (out.fds[0] >= 0) fds[out_slot = n++] = pollfd{out.fds[0], POLLIN, 0};
    if (err.fds[0] >= 0) fds[err_slot = n++] = pollfd{err.fds[0], POLLIN, 0};
    if (in.fds[1] >= 0) fds[in_slot = n++] = pollfd{in.fds[1], POLLOUT, 0};
    const int ready = ::poll(fds, n, wait_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    auto drain = [&](int slot, Pipe& pipe, std::string& sink) {
      if (slot < 0 || !(fds[slot].revents & (POLLIN | POLLHUP | POLLERR))) return;
      const ssize_t got = ::read(pipe.fds[0], buffer, sizeof buffer);
      if (got > 0)
        sink.append(buffer, static_cast<std::size_t>(got));
      else if (got == 0 || errno != EINTR)
        pipe.close_read();
    };
    drain(out_slot, out, result.stdout_text);
    drain(err_slot, err, result.stderr_text);
    if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t put = ::write(in.fds[1], input.data() + written, input.size() - written);
      if (put > 0) written += static_cast<std::size_t>(put);
      if (put < 0 && errno != EAGAIN && errno != EINTR) in.close_write();
      if (written == input.size()) in.close_write();
    }
  }
  in.close_write();

  int wstatus = 0;
  for (;;) {
    const pid_t done = ::waitpid(pid, &wstatus, result.timed_out ? 0 : WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) break;
    if (done == 0) {
      if (std::chrono::steady_clock::now() >= deadline) {
        result.timed_out = true;
        ::kill(-pid, SIGKILL);
      } else {
        ::usleep(2000);
      }
    }
  }
  if (WIFEXITED(wstatus))
    result.exit_code = WEXITSTATUS(wstatus);
  else if (WIFSIGNALED(wstatus))
    result.exit_code = -WTERMSIG(wstatus);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace ttscale
