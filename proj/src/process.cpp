#include "earlybird/process.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "earlybird/error.hpp"

namespace earlybird {

namespace {

// Temp file that is unlinked as soon as it is opened; the fd keeps it alive.
class AnonymousFile {
 public:
  AnonymousFile() {
    char tmpl[] = "/tmp/earlybird-XXXXXX";
    fd_ = ::mkstemp(tmpl);
    if (fd_ < 0) throw Error(std::string("mkstemp: ") + std::strerror(errno));
    ::unlink(tmpl);
  }
  ~AnonymousFile() {
    if (fd_ >= 0) ::close(fd_);
  }
  AnonymousFile(const AnonymousFile&) = delete;
  AnonymousFile& operator=(const AnonymousFile&) = delete;

  int fd() const { return fd_; }

  void write_all(const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(std::string("write: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
    ::lseek(fd_, 0, SEEK_SET);
  }

  std::string read_all() {
    ::lseek(fd_, 0, SEEK_SET);
    std::string out;
    char buf[1 << 14];
    for (;;) {
      const ssize_t n = ::read(fd_, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
  }

 private:
  int fd_ = -1;
};

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          const std::string* stdin_data) {
  if (argv.empty()) throw Error("run_process: empty argv");

  AnonymousFile in_file;
  if (stdin_data) in_file.write_all(*stdin_data);
  AnonymousFile err_file;

  int out_pipe[2];
  if (::pipe(out_pipe) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  const std::string dir = cwd.string();

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    throw Error(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(in_file.fd(), STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_file.fd(), STDERR_FILENO);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    if (!dir.empty() && ::chdir(dir.c_str()) != 0) ::_exit(126);
    ::execvp(cargv[0], cargv.data());
    ::_exit(127);
  }

  ::close(out_pipe[1]);
  ProcessResult result;
  char buf[1 << 16];
  for (;;) {
    const ssize_t n = ::read(out_pipe[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    result.out.append(buf, static_cast<std::size_t>(n));
  }
  ::close(out_pipe[0]);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  result.err = err_file.read_all();
  return result;
}

}  // namespace earlybird
