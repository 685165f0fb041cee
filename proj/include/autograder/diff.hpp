#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace autograder::diff {

enum class EditKind { Keep, Delete, Insert };

struct EditOp {
  EditKind kind;
  std::string line;

  bool operator==(const EditOp&) const = default;
};

// Shortest edit script under the insert/delete model. Within each run of
// changes all deletions precede all insertions.
struct EditScript {
  std::vector<EditOp> ops;

  // Number of Delete + Insert operations.
  std::size_t edit_count() const;
  bool has_changes() const { return edit_count() != 0; }

  bool operator==(const EditScript&) const = default;
};

struct HunkLine {
  char marker;  // ' ', '-' or '+'
  std::string text;

  bool operator==(const HunkLine&) const = default;
};

struct DiffHunk {
  std::size_t src_start = 0;
  std::size_t src_len = 0;
  std::size_t dst_start = 0;
  std::size_t dst_len = 0;
  std::vector<HunkLine> lines;

  bool operator==(const DiffHunk&) const = default;
};

inline constexpr std::size_t kDefaultContext = 1;
inline constexpr std::size_t kDefaultMaxLines = 100;

EditScript myers_diff(std::span<const std::string> a, std::span<const std::string> b);

// Rebuilds the target sequence. Throws GraderError(ScriptMismatch) when a
// Keep or Delete line disagrees with `a`, or the script does not consume all
// of `a`.
std::vector<std::string> apply_script(std::span<const std::string> a, const EditScript& script);

// Groups changes into hunks with `context` unchanged lines around them.
// Start positions follow diff(1): 1-based, or the preceding line when the
// range is empty.
std::vector<DiffHunk> make_hunks(const EditScript& script, std::size_t context);

// Unified-format text, one line per hunk header or hunk line, joined by '\n'
// with no trailing newline. When the rendering exceeds `max_lines`, the
// first `max_lines` lines are kept and one elision marker line is appended.
std::string render_unified(const EditScript& script, std::size_t context = kDefaultContext,
                           std::size_t max_lines = kDefaultMaxLines);

}  // namespace autograder::diff
