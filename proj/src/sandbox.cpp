#include "autograder/sandbox.hpp"

#include <fcntl.h>
#include <grp.h>
#include <poll.h>
#include <pwd.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>

namespace autograder::sandbox {

namespace {

using Clock = std::chrono::steady_clock;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw GraderError(ErrorCode::SpawnFailure, std::string("pipe: ") + std::strerror(errno));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

// Child-side failure report: a stage tag and errno written to the status pipe.
struct ChildError {
  int stage;
  int err;
};

enum ChildStage : int { kStageGroup = 1, kStageNice, kStageGroups, kStageGid, kStageUid, kStageChdir, kStageDup, kStageExec };

const char* stage_name(int stage) {
  switch (stage) {
    case kStageGroup: return "setpgid";
    case kStageNice: return "setpriority";
    case kStageGroups: return "setgroups";
    case kStageGid: return "setgid";
    case kStageUid: return "setuid";
    case kStageChdir: return "chdir";
    case kStageDup: return "dup2";
    case kStageExec: return "execve";
  }
  return "spawn";
}

[[noreturn]] void child_fail(int status_fd, int stage) {
  ChildError e{stage, errno};
  [[maybe_unused]] auto n = ::write(status_fd, &e, sizeof e);
  ::_exit(127);
}

struct Capture {
  Fd fd;
  std::string* data;
  std::size_t limit;
  bool* truncated;
};

// Reads what is available; returns false on EOF or error.
bool drain(Capture& c) {
  std::array<char, 65536> buf;
  const ssize_t n = ::read(c.fd.get(), buf.data(), buf.size());
  if (n < 0 && (errno == EINTR || errno == EAGAIN)) return true;
  if (n <= 0) return false;
  const auto got = static_cast<std::size_t>(n);
  const std::size_t room = c.limit > c.data->size() ? c.limit - c.data->size() : 0;
  c.data->append(buf.data(), std::min(room, got));
  if (got > room) *c.truncated = true;
  return true;
}

void signal_child(pid_t pid, bool group, int sig) {
  if (group) {
    ::kill(-pid, sig);
  } else {
    ::kill(pid, sig);
  }
}

}  // namespace

std::string_view to_string(Isolation isolation) {
  switch (isolation) {
    case Isolation::FullPrivilegeDrop: return "FullPrivilegeDrop";
    case Isolation::PermissionOnly: return "PermissionOnly";
    case Isolation::None: return "None";
  }
  return "None";
}

void SandboxSpec::validate() const {
  if (command.empty() || command.front().empty()) {
    throw GraderError(ErrorCode::InvalidArgument, "sandbox command is empty");
  }
  if (timeout_s < 1) {
    throw GraderError(ErrorCode::InvalidArgument, "timeout must be at least 1 second");
  }
  if (grace_s < 0) {
    throw GraderError(ErrorCode::InvalidArgument, "grace period must not be negative");
  }
  if (stdout_limit_bytes == 0 || stderr_limit_bytes == 0) {
    throw GraderError(ErrorCode::InvalidArgument, "stream limits must be positive");
  }
  const auto root = fs::weakly_canonical(workdir);
  for (const auto& exposed : exposed_files) {
    const auto p = fs::weakly_canonical(exposed.path);
    const auto rel = p.lexically_relative(root);
    if (rel.empty() || *rel.begin() == "..") {
      throw GraderError(ErrorCode::InvalidArgument,
                        "exposed file " + exposed.path.string() + " is outside the workdir",
                        exposed.path.string());
    }
  }
}

std::optional<UserIdentity> lookup_user(const std::string& name) {
  long size = ::sysconf(_SC_GETPW_R_SIZE_MAX);
  std::vector<char> buf(size > 0 ? static_cast<std::size_t>(size) : 16384);
  passwd pw{};
  passwd* result = nullptr;
  while (::getpwnam_r(name.c_str(), &pw, buf.data(), buf.size(), &result) == ERANGE) {
    buf.resize(buf.size() * 2);
  }
  if (result == nullptr) return std::nullopt;
  return UserIdentity{name, pw.pw_uid, pw.pw_gid};
}

bool running_privileged() { return ::geteuid() == 0; }

std::optional<fs::path> resolve_executable(const std::string& program, std::string_view path_var) {
  auto usable = [](const fs::path& p) {
    return ::access(p.c_str(), X_OK) == 0 && !fs::is_directory(p);
  };
  if (program.find('/') != std::string::npos) {
    if (usable(program)) return fs::path(program);
    return std::nullopt;
  }
  std::size_t start = 0;
  while (start <= path_var.size()) {
    std::size_t end = path_var.find(':', start);
    if (end == std::string_view::npos) end = path_var.size();
    std::string dir(path_var.substr(start, end - start));
    if (dir.empty()) dir = ".";
    const fs::path candidate = fs::path(dir) / program;
    if (usable(candidate)) return candidate;
    start = end + 1;
  }
  return std::nullopt;
}

RunOutcome run_sandboxed(const SandboxSpec& spec) {
  spec.validate();
  RunOutcome outcome;

  std::optional<UserIdentity> identity;
  if (spec.run_as_user) {
    identity = lookup_user(*spec.run_as_user);
    if (!identity) {
      throw GraderError(ErrorCode::UserUnknown, "no such user '" + *spec.run_as_user + "'",
                        *spec.run_as_user);
    }
    if (!running_privileged()) {
      if (spec.require_privilege_drop) {
        throw GraderError(ErrorCode::InsufficientPrivilege,
                          "cannot switch to user '" + *spec.run_as_user + "' without root");
      }
      outcome.diagnostics.push_back(
          warning("not privileged; running as the current user instead of " + *spec.run_as_user));
      identity.reset();
    }
  }
  if (identity) {
    outcome.isolation = Isolation::FullPrivilegeDrop;
  } else if (!spec.exposed_files.empty() || spec.run_as_user) {
    outcome.isolation = Isolation::PermissionOnly;
  }

  const auto path_it = spec.env.find("PATH");
  const std::string path_var = path_it != spec.env.end() ? path_it->second : "/usr/bin:/bin";
  const auto executable = resolve_executable(spec.command.front(), path_var);
  if (!executable) {
    throw GraderError(ErrorCode::SpawnFailure, "command not found: " + spec.command.front(),
                      spec.command.front());
  }

  // Everything the child needs is prepared before fork.
  std::vector<std::string> env_strings;
  for (const auto& [k, v] : spec.env) env_strings.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::vector<std::string> args = spec.command;
  std::vector<char*> argv;
  for (auto& s : args) argv.push_back(s.data());
  argv.push_back(nullptr);
  const std::string exe = executable->string();
  const std::string workdir = spec.workdir.string();

  // Exposure lasts for the lifetime of the child.
  std::vector<std::unique_ptr<detail::ModeGuard>> exposures;
  for (const auto& exposed : spec.exposed_files) {
    exposures.push_back(std::make_unique<detail::ModeGuard>(exposed.path, exposed.mode));
  }

  auto [out_r, out_w] = make_pipe();
  auto [err_r, err_w] = make_pipe();
  auto [status_r, status_w] = make_pipe();
  Fd dev_null(::open("/dev/null", O_RDONLY | O_CLOEXEC));

  const auto started = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    throw GraderError(ErrorCode::SpawnFailure, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    const int sfd = status_w.get();
    if (spec.own_process_group && ::setpgid(0, 0) != 0) child_fail(sfd, kStageGroup);
    if (spec.niceness) {
      errno = 0;
      if (::nice(*spec.niceness) == -1 && errno != 0) child_fail(sfd, kStageNice);
    }
    if (identity) {
      if (::setgroups(0, nullptr) != 0) child_fail(sfd, kStageGroups);
      if (::setgid(identity->gid) != 0) child_fail(sfd, kStageGid);
      if (::setuid(identity->uid) != 0) child_fail(sfd, kStageUid);
    }
    if (::chdir(workdir.c_str()) != 0) child_fail(sfd, kStageChdir);
    if (::dup2(dev_null.get(), STDIN_FILENO) < 0 || ::dup2(out_w.get(), STDOUT_FILENO) < 0 ||
        ::dup2(err_w.get(), STDERR_FILENO) < 0) {
      child_fail(sfd, kStageDup);
    }
    ::signal(SIGPIPE, SIG_DFL);
    ::signal(SIGTERM, SIG_DFL);
    ::signal(SIGINT, SIG_DFL);
    ::execve(exe.c_str(), argv.data(), envp.data());
    child_fail(sfd, kStageExec);
  }

  if (spec.own_process_group) ::setpgid(pid, pid);  // closes the race with the child's own call
  out_w.reset();
  err_w.reset();
  status_w.reset();
  dev_null.reset();

  ChildError child_error{};
  ssize_t got = 0;
  do {
    got = ::read(status_r.get(), &child_error, sizeof child_error);
  } while (got < 0 && errno == EINTR);
  if (got == static_cast<ssize_t>(sizeof child_error)) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    throw GraderError(ErrorCode::SpawnFailure,
                      std::string(stage_name(child_error.stage)) + " failed in child: " +
                          std::strerror(child_error.err),
                      spec.command.front());
  }

  std::array<Capture, 2> captures{Capture{std::move(out_r), &outcome.stdout_data, spec.stdout_limit_bytes,
                                          &outcome.stdout_truncated},
                                  Capture{std::move(err_r), &outcome.stderr_data, spec.stderr_limit_bytes,
                                          &outcome.stderr_truncated}};

  const auto term_at = started + std::chrono::seconds(spec.timeout_s);
  const auto kill_at = term_at + std::chrono::seconds(spec.grace_s);
  // Stragglers holding our pipes open get this long after the child is gone.
  const auto abandon_at = kill_at + std::chrono::milliseconds(500);
  bool term_sent = false;
  bool kill_sent = false;
  bool reaped = false;
  int status = 0;

  while (true) {
    if (!reaped) {
      const pid_t r = ::waitpid(pid, &status, WNOHANG);
      if (r == pid) {
        reaped = true;
        if (spec.own_process_group) signal_child(pid, true, SIGKILL);
      }
    }
    const bool streams_open = captures[0].fd.valid() || captures[1].fd.valid();
    if (reaped && !streams_open) break;

    const auto now = Clock::now();
    if (!reaped && !term_sent && now >= term_at) {
      outcome.timed_out = true;
      term_sent = true;
      signal_child(pid, spec.own_process_group, SIGTERM);
    }
    if (!reaped && !kill_sent && now >= kill_at) {
      kill_sent = true;
      signal_child(pid, spec.own_process_group, SIGKILL);
    }
    if (reaped && now >= abandon_at) break;

    std::array<pollfd, 2> fds{};
    nfds_t count = 0;
    std::array<int, 2> which{};
    for (int i = 0; i < 2; ++i) {
      if (captures[i].fd.valid()) {
        fds[count] = {captures[i].fd.get(), POLLIN, 0};
        which[count++] = i;
      }
    }
    // Short ticks keep the reap check and signal deadlines responsive.
    const int wait_ms = streams_open ? 20 : 5;
    const int n = ::poll(fds.data(), count, wait_ms);
    if (n > 0) {
      for (nfds_t i = 0; i < count; ++i) {
        if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) {
          if (!drain(captures[which[i]])) captures[which[i]].fd.reset();
        }
      }
    }
  }
  if (!reaped) {
    signal_child(pid, spec.own_process_group, SIGKILL);
    ::waitpid(pid, &status, 0);
  }

  outcome.duration_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();
  if (WIFEXITED(status)) {
    outcome.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    outcome.term_signal = WTERMSIG(status);
  }
  if (outcome.timed_out) {
    outcome.diagnostics.push_back(warning("timed out after " + std::to_string(spec.timeout_s) + " s"));
  }
  if (outcome.stdout_truncated) {
    outcome.diagnostics.push_back(
        warning("stdout truncated at " + std::to_string(spec.stdout_limit_bytes) + " bytes"));
  }
  if (outcome.stderr_truncated) {
    outcome.diagnostics.push_back(
        warning("stderr truncated at " + std::to_string(spec.stderr_limit_bytes) + " bytes"));
  }
  return outcome;
}

namespace detail {

ModeGuard::ModeGuard(fs::path path, fs::perms mode) : path_(std::move(path)) {
  std::error_code ec;
  previous_ = fs::status(path_, ec).permissions();
  if (ec || !fs::exists(path_)) {
    throw GraderError(ErrorCode::InvalidArgument, "cannot expose missing file " + path_.string(),
                      path_.string());
  }
  fs::permissions(path_, mode, fs::perm_options::replace);
}

ModeGuard::~ModeGuard() {
  std::error_code ec;
  fs::permissions(path_, previous_, fs::perm_options::replace, ec);
}

}  // namespace detail

}  // namespace autograder::sandbox
