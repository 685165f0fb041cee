#pragma once

#include <sys/types.h>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autograder/diagnostic.hpp"
#include "autograder/error.hpp"

namespace autograder::sandbox {

namespace fs = std::filesystem;

enum class Isolation { FullPrivilegeDrop, PermissionOnly, None };

std::string_view to_string(Isolation isolation);

inline constexpr std::size_t kDefaultStreamLimit = 1024 * 1024;
inline constexpr int kDefaultGraceSeconds = 1;
inline constexpr std::string_view kDefaultGradingUser = "ag";

struct ExposedFile {
  fs::path path;
  fs::perms mode = fs::perms::owner_read | fs::perms::owner_write | fs::perms::group_read |
                   fs::perms::group_write | fs::perms::others_read;  // 0664
};

struct SandboxSpec {
  fs::path workdir;
  std::vector<std::string> command;
  std::map<std::string, std::string> env;
  std::optional<std::string> run_as_user;
  int timeout_s = 5;
  int grace_s = kDefaultGraceSeconds;
  std::vector<ExposedFile> exposed_files;
  std::size_t stdout_limit_bytes = kDefaultStreamLimit;
  std::size_t stderr_limit_bytes = kDefaultStreamLimit;
  // Added to the child's niceness when set.
  std::optional<int> niceness;
  // Fail with InsufficientPrivilege instead of running unprivileged when
  // run_as_user is set but the caller cannot switch users.
  bool require_privilege_drop = false;
  // Place the child in its own process group and signal the whole group on
  // timeout. Nested runs inside an already-confined child turn this off so
  // the outer runner's group kill still reaches them.
  bool own_process_group = true;

  // Throws GraderError(InvalidArgument).
  void validate() const;
};

struct RunOutcome {
  std::optional<int> exit_code;
  std::optional<int> term_signal;
  bool timed_out = false;
  std::string stdout_data;
  std::string stderr_data;
  bool stdout_truncated = false;
  bool stderr_truncated = false;
  std::int64_t duration_ms = 0;
  Isolation isolation = Isolation::None;
  Diagnostics diagnostics;

  bool succeeded() const { return !timed_out && exit_code == 0; }
};

struct UserIdentity {
  std::string name;
  uid_t uid = 0;
  gid_t gid = 0;
};

std::optional<UserIdentity> lookup_user(const std::string& name);

bool running_privileged();

// Searches PATH (colon-separated) for `program`; names containing '/' are
// checked directly.
std::optional<fs::path> resolve_executable(const std::string& program, std::string_view path_var);

// Throws SpawnFailure, UserUnknown, InsufficientPrivilege or InvalidArgument.
// All other failures of the child are reported in the outcome.
RunOutcome run_sandboxed(const SandboxSpec& spec);

// ---------------------------------------------------------------------------
// Lockdown

struct LockdownPlan {
  // Owned by root afterwards, group/other bits stripped. Directories recurse.
  std::vector<fs::path> root_owned_paths;
  // Owned by the grading user afterwards. Directories recurse.
  std::vector<fs::path> writable_for_grader;

  // Throws InvalidArgument when a path of one set equals or lies inside a
  // path of the other.
  void validate() const;
};

struct PathRecord {
  fs::path path;
  uid_t uid = 0;
  gid_t gid = 0;
  mode_t mode = 0;  // permission bits only

  bool operator==(const PathRecord&) const = default;
};

struct LockdownOptions {
  std::string grading_user{kDefaultGradingUser};
  bool strict = false;
  // Overrides privilege detection; unset means "ask the kernel".
  std::optional<bool> privileged;
};

struct LockdownReceipt {
  std::vector<PathRecord> records;  // prior state, in application order
  Isolation isolation = Isolation::None;
  std::optional<UserIdentity> grading_user;  // set only for FullPrivilegeDrop
  Diagnostics diagnostics;
};

// Throws InsufficientPrivilege or UserUnknown in strict mode; otherwise
// degrades and says so in the receipt.
LockdownReceipt apply_lockdown(const LockdownPlan& plan, const LockdownOptions& options = {});

// Restores every recorded owner and mode, newest first. Returns diagnostics
// for paths that could not be restored.
Diagnostics undo_lockdown(const LockdownReceipt& receipt);

PathRecord snapshot(const fs::path& path);

// Sets `path` to `mode` for the duration of `action`, then restores the
// previous mode whether or not `action` throws.
template <class Action>
decltype(auto) expose_file_during(const fs::path& path, fs::perms mode, Action&& action);

// ---------------------------------------------------------------------------
// Staging

struct StagedJob {
  fs::path job_root;
  fs::path run_dir;      // <job_root>/run
  fs::path bin_dir;      // <job_root>/run/bin, student files
  fs::path results_dir;  // <job_root>/results
  fs::path work_root;    // <job_root>/run/work, per-test scratch parent
  std::vector<fs::path> student_files;  // staged copies, sorted
  Diagnostics diagnostics;
};

// Copies student files into run/bin/, autograder assets into run/, and the
// contents of tests_dir into run/. Any previous run/ is removed and results/
// is emptied. Throws GraderError(CopyFailure).
StagedJob stage_job(const fs::path& student_dir, const std::optional<fs::path>& autograder_dir,
                    const fs::path& tests_dir, const fs::path& job_root);

// Creates a fresh scratch directory for one test under work_root and copies
// the staged student files into it. Returns the directory.
fs::path prepare_workdir(const StagedJob& job, const std::string& name);

// ---------------------------------------------------------------------------

namespace detail {

class ModeGuard {
 public:
  ModeGuard(fs::path path, fs::perms mode);
  ~ModeGuard();
  ModeGuard(const ModeGuard&) = delete;
  ModeGuard& operator=(const ModeGuard&) = delete;

 private:
  fs::path path_;
  fs::perms previous_;
};

}  // namespace detail

template <class Action>
decltype(auto) expose_file_during(const fs::path& path, fs::perms mode, Action&& action) {
  detail::ModeGuard guard(path, mode);
  return std::forward<Action>(action)();
}

}  // namespace autograder::sandbox
