#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <set>

#include "autograder/sandbox.hpp"

namespace autograder::sandbox {

namespace {

bool contains(const fs::path& outer, const fs::path& inner) {
  const auto rel = inner.lexically_normal().lexically_relative(outer.lexically_normal());
  return !rel.empty() && *rel.begin() != "..";
}

// The path itself, then everything below it when it is a real directory.
std::vector<fs::path> expand(const fs::path& root) {
  std::vector<fs::path> out{root};
  if (fs::is_directory(fs::symlink_status(root))) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) out.push_back(entry.path());
  }
  return out;
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

void LockdownPlan::validate() const {
  for (const auto& locked : root_owned_paths) {
    for (const auto& writable : writable_for_grader) {
      if (contains(locked, writable) || contains(writable, locked)) {
        throw GraderError(ErrorCode::InvalidArgument,
                          "lockdown sets overlap: " + locked.string() + " and " + writable.string(),
                          writable.string());
      }
    }
  }
}

PathRecord snapshot(const fs::path& path) {
  struct stat st {};
  if (::lstat(path.c_str(), &st) != 0) {
    throw GraderError(ErrorCode::InvalidArgument, "cannot stat " + path.string() + ": " + errno_text(),
                      path.string());
  }
  return {path, st.st_uid, st.st_gid, static_cast<mode_t>(st.st_mode & 07777)};
}

LockdownReceipt apply_lockdown(const LockdownPlan& plan, const LockdownOptions& options) {
  plan.validate();
  LockdownReceipt receipt;
  const bool privileged = options.privileged.value_or(running_privileged());

  if (!privileged && options.strict) {
    throw GraderError(ErrorCode::InsufficientPrivilege,
                      "strict isolation requires root to lock down grading files");
  }
  std::optional<UserIdentity> user = lookup_user(options.grading_user);
  if (privileged && !user) {
    if (options.strict) {
      throw GraderError(ErrorCode::UserUnknown, "grading user '" + options.grading_user + "' does not exist",
                        options.grading_user);
    }
    receipt.diagnostics.push_back(
        warning("grading user '" + options.grading_user + "' does not exist; tests run without a privilege drop"));
  }
  if (!privileged) {
    receipt.diagnostics.push_back(
        warning("not running as root; ownership unchanged, group/other permissions stripped only"));
  }

  std::set<fs::path> seen;
  bool chmod_failed = false;
  auto record = [&](const fs::path& p) -> std::optional<PathRecord> {
    if (!seen.insert(p).second) return snapshot(p);
    receipt.records.push_back(snapshot(p));
    return receipt.records.back();
  };

  for (const auto& root : plan.root_owned_paths) {
    for (const auto& p : expand(root)) {
      const auto prior = record(p);
      if (fs::is_symlink(fs::symlink_status(p))) continue;
      if (privileged && ::lchown(p.c_str(), 0, 0) != 0) {
        receipt.diagnostics.push_back(warning("chown failed: " + errno_text(), p.string()));
      }
      if (::chmod(p.c_str(), prior->mode & ~static_cast<mode_t>(077)) != 0) {
        chmod_failed = true;
        receipt.diagnostics.push_back(warning("chmod failed: " + errno_text(), p.string()));
      }
    }
  }

  const bool can_drop = privileged && user.has_value();
  for (const auto& root : plan.writable_for_grader) {
    for (const auto& p : expand(root)) {
      const auto prior = record(p);
      if (!can_drop || fs::is_symlink(fs::symlink_status(p))) continue;
      if (::lchown(p.c_str(), user->uid, user->gid) != 0) {
        receipt.diagnostics.push_back(warning("chown failed: " + errno_text(), p.string()));
      }
      // chown clears set-id bits; put the recorded mode back.
      ::chmod(p.c_str(), prior->mode);
    }
  }

  if (can_drop) {
    receipt.isolation = Isolation::FullPrivilegeDrop;
    receipt.grading_user = user;
  } else {
    receipt.isolation = chmod_failed ? Isolation::None : Isolation::PermissionOnly;
  }
  return receipt;
}

Diagnostics undo_lockdown(const LockdownReceipt& receipt) {
  Diagnostics problems;
  const bool privileged = running_privileged();
  for (auto it = receipt.records.rbegin(); it != receipt.records.rend(); ++it) {
    std::error_code ec;
    const auto st = fs::symlink_status(it->path, ec);
    if (ec || !fs::exists(st)) {
      problems.push_back(warning("path vanished before restore", it->path.string()));
      continue;
    }
    if (privileged && ::lchown(it->path.c_str(), it->uid, it->gid) != 0) {
      problems.push_back(warning("chown restore failed: " + errno_text(), it->path.string()));
    }
    if (!fs::is_symlink(st) && ::chmod(it->path.c_str(), it->mode) != 0) {
      problems.push_back(warning("chmod restore failed: " + errno_text(), it->path.string()));
    }
  }
  return problems;
}

}  // namespace autograder::sandbox
