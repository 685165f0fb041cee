#include <sys/stat.h>

#include <algorithm>

#include "autograder/sandbox.hpp"

namespace autograder::sandbox {

namespace {

constexpr auto kDirMode = fs::perms(0755);

[[noreturn]] void copy_failure(const fs::path& path, const std::string& cause) {
  throw GraderError(ErrorCode::CopyFailure, "cannot copy " + path.string() + ": " + cause, path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!ec) fs::permissions(dir, kDirMode, fs::perm_options::replace, ec);
  if (ec) copy_failure(dir, ec.message());
}

void copy_one(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
  if (ec) copy_failure(from, ec.message());
}

// Recursive copy that names the file that failed.
void copy_tree(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::directory_iterator it(from, ec);
  if (ec) copy_failure(from, ec.message());
  std::vector<fs::directory_entry> entries(it, fs::directory_iterator{});
  std::sort(entries.begin(), entries.end());
  for (const auto& entry : entries) {
    const fs::path target = to / entry.path().filename();
    if (entry.is_directory()) {
      make_dir(target);
      copy_tree(entry.path(), target);
    } else if (entry.is_regular_file()) {
      copy_one(entry.path(), target);
    }
  }
}

std::vector<fs::path> regular_files(const fs::path& dir, Diagnostics& diagnostics) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) copy_failure(dir, ec.message());
  std::vector<fs::path> files;
  for (const auto& entry : it) {
    if (entry.is_regular_file()) {
      files.push_back(entry.path());
    } else {
      diagnostics.push_back(warning("not a regular file, not copied", entry.path().string()));
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

StagedJob stage_job(const fs::path& student_dir, const std::optional<fs::path>& autograder_dir,
                    const fs::path& tests_dir, const fs::path& job_root) {
  StagedJob job;
  job.job_root = job_root;
  job.run_dir = job_root / "run";
  job.bin_dir = job.run_dir / "bin";
  job.work_root = job.run_dir / "work";
  job.results_dir = job_root / "results";

  if (!fs::is_directory(student_dir)) copy_failure(student_dir, "source directory does not exist");
  if (!fs::is_directory(tests_dir)) copy_failure(tests_dir, "source directory does not exist");

  std::error_code ec;
  fs::remove_all(job.run_dir, ec);
  if (ec) copy_failure(job.run_dir, "cannot clear previous run: " + ec.message());
  make_dir(job.run_dir);
  make_dir(job.bin_dir);
  make_dir(job.work_root);
  make_dir(job.results_dir);
  for (const auto& entry : fs::directory_iterator(job.results_dir)) {
    fs::remove_all(entry.path(), ec);
  }

  for (const auto& file : regular_files(student_dir, job.diagnostics)) {
    const fs::path target = job.bin_dir / file.filename();
    copy_one(file, target);
    job.student_files.push_back(target);
  }
  if (job.student_files.empty()) {
    job.diagnostics.push_back(warning("submission contains no files", student_dir.string()));
  }

  if (autograder_dir && fs::is_directory(*autograder_dir)) {
    for (const auto& file : regular_files(*autograder_dir, job.diagnostics)) {
      copy_one(file, job.run_dir / file.filename());
    }
  }

  copy_tree(tests_dir, job.run_dir);
  return job;
}

fs::path prepare_workdir(const StagedJob& job, const std::string& name) {
  const fs::path dir = job.work_root / name;
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (ec) copy_failure(dir, "cannot clear previous workdir: " + ec.message());
  make_dir(dir);
  for (const auto& file : job.student_files) {
    const fs::path target = dir / file.filename();
    copy_one(file, target);
    fs::permissions(target, fs::perms(0600), fs::perm_options::replace, ec);
  }
  return dir;
}

}  // namespace autograder::sandbox
