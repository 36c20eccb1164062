/*
 * Copyright 2026 The Nuclei Curation Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Runs the curate binary from tests: one-shot runs with captured output, and
// a long-lived child whose stdout can be read line by line.

#ifndef NUCLEI_CURATION_TESTS_SUBPROCESS_H_
#define NUCLEI_CURATION_TESTS_SUBPROCESS_H_

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

extern char** environ;

namespace nuclei_curation::testing {

struct ProcessResult {
  int exit_code = -1;  // 128 + signal when killed.
  std::string out;
  std::string err;
};

namespace internal {

// Environment of this process with `overrides` applied. An empty value
// removes the variable.
inline std::vector<std::string> MergedEnvironment(
    const std::map<std::string, std::string>& overrides) {
  std::vector<std::string> env;
  for (char** e = environ; *e != nullptr; ++e) {
    const std::string entry = *e;
    const std::string name = entry.substr(0, entry.find('='));
    if (!overrides.contains(name)) env.push_back(entry);
  }
  for (const auto& [name, value] : overrides) {
    if (!value.empty()) env.push_back(name + "=" + value);
  }
  return env;
}

inline std::vector<char*> Pointers(std::vector<std::string>& strings) {
  std::vector<char*> ptrs;
  for (std::string& s : strings) ptrs.push_back(s.data());
  ptrs.push_back(nullptr);
  return ptrs;
}

inline std::string Slurp(int fd) {
  std::string text;
  char buffer[4096];
  lseek(fd, 0, SEEK_SET);
  while (true) {
    const ssize_t n = read(fd, buffer, sizeof(buffer));
    if (n <= 0) break;
    text.append(buffer, static_cast<std::size_t>(n));
  }
  return text;
}

inline int ExitCode(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

inline int AnonymousFile() {
  char name[] = "/tmp/nc-proc-XXXXXX";
  const int fd = mkstemp(name);
  if (fd < 0) throw std::runtime_error("mkstemp failed");
  unlink(name);
  return fd;
}

}  // namespace internal

// Runs `argv` to completion. Output goes through unlinked temp files, so a
// chatty child cannot block on a full pipe.
inline ProcessResult RunProcess(std::vector<std::string> argv,
                                const std::map<std::string, std::string>& env = {}) {
  std::vector<std::string> environment = internal::MergedEnvironment(env);
  std::vector<char*> args = internal::Pointers(argv);
  std::vector<char*> envp = internal::Pointers(environment);
  const int out = internal::AnonymousFile();
  const int err = internal::AnonymousFile();
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    dup2(out, STDOUT_FILENO);
    dup2(err, STDERR_FILENO);
    const int null_in = open("/dev/null", O_RDONLY);
    dup2(null_in, STDIN_FILENO);
    execve(args[0], args.data(), envp.data());
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  ProcessResult result;
  result.exit_code = internal::ExitCode(status);
  result.out = internal::Slurp(out);
  result.err = internal::Slurp(err);
  close(out);
  close(err);
  return result;
}

// A background child with stdout on a pipe. Killed on destruction.
class ChildProcess {
 public:
  ChildProcess(std::vector<std::string> argv,
               const std::map<std::string, std::string>& env = {}) {
    std::vector<std::string> environment = internal::MergedEnvironment(env);
    std::vector<char*> args = internal::Pointers(argv);
    std::vector<char*> envp = internal::Pointers(environment);
    int pipe_fds[2];
    if (pipe(pipe_fds) != 0) throw std::runtime_error("pipe failed");
    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error("fork failed");
    if (pid_ == 0) {
      dup2(pipe_fds[1], STDOUT_FILENO);
      close(pipe_fds[0]);
      close(pipe_fds[1]);
      const int null_fd = open("/dev/null", O_RDWR);
      dup2(null_fd, STDIN_FILENO);
      dup2(null_fd, STDERR_FILENO);
      execve(args[0], args.data(), envp.data());
      _exit(127);
    }
    close(pipe_fds[1]);
    stdout_ = fdopen(pipe_fds[0], "r");
  }

  ~ChildProcess() {
    if (pid_ > 0) {
      Signal(SIGKILL);
      Wait();
    }
    if (stdout_ != nullptr) fclose(stdout_);
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  // Next stdout line without the newline; nullopt at EOF.
  std::optional<std::string> ReadLine() {
    std::string line;
    int c;
    while ((c = fgetc(stdout_)) != EOF) {
      if (c == '\n') return line;
      line.push_back(static_cast<char>(c));
    }
    if (line.empty()) return std::nullopt;
    return line;
  }

  void Signal(int sig) {
    if (pid_ > 0) kill(pid_, sig);
  }

  // Reaps the child and returns its exit code.
  int Wait() {
    if (pid_ <= 0) return exit_code_;
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    exit_code_ = internal::ExitCode(status);
    return exit_code_;
  }

 private:
  pid_t pid_ = -1;
  FILE* stdout_ = nullptr;
  int exit_code_ = -1;
};

// Port from a "listening on host:port" line, or -1.
inline int PortFromListenLine(const std::string& line) {
  const std::string prefix = "listening on ";
  if (line.rfind(prefix, 0) != 0) return -1;
  const std::size_t colon = line.rfind(':');
  if (colon == std::string::npos) return -1;
  return std::stoi(line.substr(colon + 1));
}

}  // namespace nuclei_curation::testing

#endif  // NUCLEI_CURATION_TESTS_SUBPROCESS_H_
