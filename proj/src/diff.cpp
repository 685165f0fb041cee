#include "autograder/diff.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>

#include "autograder/error.hpp"

namespace autograder::diff {

namespace {

using Lines = std::span<const std::string>;

// Cheap rejection on the first byte before the full comparison. The first
// byte of an empty string is its terminator.
inline bool same_line(const std::string& x, const std::string& y) {
  const std::size_t n = x.size();
  return n == y.size() && x.data()[0] == y.data()[0] &&
         (n <= 1 || std::char_traits<char>::compare(x.data() + 1, y.data() + 1, n - 1) == 0);
}

constexpr std::ptrdiff_t kGreedyLimit = 128;

struct Snake {
  std::ptrdiff_t x_begin, y_begin, x_end, y_end;
};

// Linear-space Myers. The forward and reverse searches share two V arrays
// that are reused across recursion levels (and across calls on the same
// thread); each level finishes with them before recursing. Subproblems of at
// most kGreedyLimit lines use the basic greedy search, keeping every V row
// for the backtrack; that trace is under (kGreedyLimit + 3)^2 entries.
//
// Insertions are held back until the next kept line, so within every run of
// changes the deletions come out first.
class MyersSolver {
 public:
  MyersSolver(Lines a, Lines b)
      : a_(a), b_(b), offset_(static_cast<std::ptrdiff_t>(a.size() + b.size()) + 1) {
    const auto width = static_cast<std::size_t>(2 * offset_ + 1);
    if (scratch_.v.size() < 2 * width) scratch_.v.resize(2 * width);
    forward_ = scratch_.v.data();
    reverse_ = scratch_.v.data() + width;
    pending_.clear();
    ops_.reserve(a.size() + b.size());
  }

  std::vector<EditOp> solve() && {
    compare(0, std::ssize(a_), 0, std::ssize(b_));
    flush();
    return std::move(ops_);
  }

 private:
  void flush() {
    for (auto y : pending_) ops_.emplace_back(EditKind::Insert, b_[y]);
    pending_.clear();
  }
  void keep(std::ptrdiff_t x) {
    flush();
    ops_.emplace_back(EditKind::Keep, a_[x]);
  }
  bool same(std::ptrdiff_t x, std::ptrdiff_t y) const { return same_line(a_[x], b_[y]); }
  void erase(std::ptrdiff_t x) { ops_.emplace_back(EditKind::Delete, a_[x]); }
  void insert(std::ptrdiff_t y) { pending_.push_back(y); }

  void compare(std::ptrdiff_t x0, std::ptrdiff_t x1, std::ptrdiff_t y0, std::ptrdiff_t y1) {
    while (x0 < x1 && y0 < y1 && same(x0, y0)) {
      keep(x0);
      ++x0;
      ++y0;
    }
    std::ptrdiff_t suffix = 0;
    while (x0 < x1 && y0 < y1 && same(x1 - 1, y1 - 1)) {
      --x1;
      --y1;
      ++suffix;
    }

    if (x0 == x1) {
      for (auto y = y0; y < y1; ++y) insert(y);
    } else if (y0 == y1) {
      for (auto x = x0; x < x1; ++x) erase(x);
    } else if ((x1 - x0) + (y1 - y0) <= kGreedyLimit) {
      greedy(x0, x1, y0, y1);
    } else {
      const Snake s = middle_snake(x0, x1, y0, y1);
      compare(x0, s.x_begin, y0, s.y_begin);
      for (auto x = s.x_begin; x < s.x_end; ++x) keep(x);
      compare(s.x_end, x1, s.y_end, y1);
    }

    for (std::ptrdiff_t i = 0; i < suffix; ++i) keep(x1 + i);
  }

  // Forward search from (x0, y0); row d of the trace holds V[-d..d] for
  // round d, padded on both sides with a value below any real x so the
  // furthest-reaching choice needs no boundary tests. The backtrack from
  // (x1, y1) then marks each edit at its position in the script, every other
  // position being a kept line.
  void greedy(std::ptrdiff_t x0, std::ptrdiff_t x1, std::ptrdiff_t y0, std::ptrdiff_t y1) {
    const std::ptrdiff_t n = x1 - x0;
    const std::ptrdiff_t m = y1 - y0;
    const std::string* const lines_a = a_.data() + x0;
    const std::string* const lines_b = b_.data() + y0;
    constexpr std::ptrdiff_t kPad = -2;
    const std::ptrdiff_t rows = n + m + 1;
    const auto trace_size = static_cast<std::size_t>(rows * rows + 4 * rows);
    if (trace_.size() < trace_size) trace_.resize(trace_size);
    // Row d spans k = -d-2 .. d+2 so that round d+1 finds pads at k = +-(d+2).
    std::ptrdiff_t* const trace = trace_.data();
    auto row = [trace](std::ptrdiff_t d) { return trace + d * d + 5 * d + 2; };  // indexed by k

    // Follows diagonal k from x while the lines match.
    auto slide = [&](std::ptrdiff_t x, std::ptrdiff_t k) {
      const std::ptrdiff_t end = std::min(n, m + k);
      while (x < end && same_line(lines_a[x], lines_b[x - k])) ++x;
      return x;
    };

    // The search ends once diagonal n - m reaches (n, m).
    const std::ptrdiff_t delta = n - m;
    std::ptrdiff_t final_d = -1;
    std::ptrdiff_t* cur = row(0);
    cur[-2] = cur[2] = kPad;
    cur[0] = slide(0, 0);
    if (delta == 0 && cur[0] >= n) final_d = 0;
    for (std::ptrdiff_t d = 1; final_d < 0; ++d) {
      const std::ptrdiff_t* prev = cur;
      cur += 2 * d + 4;
      cur[-d - 2] = cur[d + 2] = kPad;
      for (std::ptrdiff_t k = -d; k <= d; k += 2) {
        const std::ptrdiff_t start = std::max(prev[k - 1] + 1, prev[k + 1]);
        cur[k] = slide(start, k);
      }
      if (d >= std::abs(delta) && ((d - delta) & 1) == 0 && cur[delta] >= n) final_d = d;
    }

    // The d-th edit starts from the point (x, y) reached with d - 1 edits and
    // (x + y - d + 1) / 2 kept lines, so it is op number (x + y + d - 1) / 2.
    const auto length = static_cast<std::size_t>((n + m + final_d) / 2);
    if (kinds_.size() < length) kinds_.resize(length);
    EditKind* const kinds = kinds_.data();
    std::fill(kinds, kinds + length, EditKind::Keep);
    // Inserts are moved behind the deletes of their run by the general path,
    // which is only needed when some insert directly precedes a delete or
    // earlier inserts are still pending.
    bool reorder = !pending_.empty();
    std::ptrdiff_t x = n, y = m;
    std::ptrdiff_t next_at = -2, next_down = 1;
    for (std::ptrdiff_t d = final_d; d > 0; --d) {
      const std::ptrdiff_t k = x - y;
      const std::ptrdiff_t* prev = row(d - 1);
      const std::ptrdiff_t down = prev[k + 1] >= prev[k - 1] + 1;
      const std::ptrdiff_t prev_k = k - 1 + 2 * down;
      x = prev[prev_k];
      y = x - prev_k;
      const std::ptrdiff_t at = (x + y + d - 1) / 2;
      kinds[at] = down != 0 ? EditKind::Insert : EditKind::Delete;
      reorder |= (next_at == at + 1) & (down > next_down);
      next_at = at;
      next_down = down;
    }

    if (reorder) {
      std::ptrdiff_t i = 0, j = 0;
      for (std::size_t t = 0; t < length; ++t) {
        switch (kinds[t]) {
          case EditKind::Keep: keep(x0 + i++); ++j; break;
          case EditKind::Delete: erase(x0 + i++); break;
          case EditKind::Insert: insert(y0 + j++); break;
        }
      }
      return;
    }

    // Trailing inserts stay pending so that deletes emitted next still come
    // before them.
    std::size_t direct = length;
    while (direct > 0 && kinds[direct - 1] == EditKind::Insert) --direct;
    std::ptrdiff_t i = 0, j = 0;
    for (std::size_t t = 0; t < direct; ++t) {
      const EditKind kind = kinds[t];
      const std::string* line = kind == EditKind::Insert ? lines_b + j : lines_a + i;
      ops_.emplace_back(kind, *line);
      i += kind != EditKind::Insert;
      j += kind != EditKind::Delete;
    }
    for (; j < m; ++j) insert(y0 + j);
  }

  // Both ranges non-empty, first and last elements differ.
  Snake middle_snake(std::ptrdiff_t x0, std::ptrdiff_t x1, std::ptrdiff_t y0, std::ptrdiff_t y1) {
    const std::ptrdiff_t n = x1 - x0;
    const std::ptrdiff_t m = y1 - y0;
    const std::ptrdiff_t delta = n - m;
    const bool odd = (delta & 1) != 0;
    const std::ptrdiff_t max_d = (n + m + 1) / 2;

    // forward_[k]: furthest x on diagonal k = x - y (relative to x0, y0).
    // reverse_[c]: furthest distance travelled from (x1, y1) on reversed
    // diagonal c, which is diagonal k = delta - c in forward terms.
    auto fv = [&](std::ptrdiff_t k) -> std::ptrdiff_t& { return forward_[k + offset_]; };
    auto rv = [&](std::ptrdiff_t c) -> std::ptrdiff_t& { return reverse_[c + offset_]; };
    fv(1) = 0;
    rv(1) = 0;

    for (std::ptrdiff_t d = 0; d <= max_d; ++d) {
      for (std::ptrdiff_t k = -d; k <= d; k += 2) {
        std::ptrdiff_t x = (k == -d || (k != d && fv(k - 1) < fv(k + 1))) ? fv(k + 1) : fv(k - 1) + 1;
        std::ptrdiff_t y = x - k;
        const std::ptrdiff_t sx = x, sy = y;
        while (x < n && y < m && same(x0 + x, y0 + y)) {
          ++x;
          ++y;
        }
        fv(k) = x;
        const std::ptrdiff_t c = delta - k;
        if (odd && c >= -(d - 1) && c <= d - 1 && x + rv(c) >= n) {
          return {x0 + sx, y0 + sy, x0 + x, y0 + y};
        }
      }
      for (std::ptrdiff_t c = -d; c <= d; c += 2) {
        std::ptrdiff_t u = (c == -d || (c != d && rv(c - 1) < rv(c + 1))) ? rv(c + 1) : rv(c - 1) + 1;
        std::ptrdiff_t v = u - c;
        const std::ptrdiff_t su = u, sv = v;
        while (u < n && v < m && same(x1 - 1 - u, y1 - 1 - v)) {
          ++u;
          ++v;
        }
        rv(c) = u;
        const std::ptrdiff_t k = delta - c;
        if (!odd && k >= -d && k <= d && u + fv(k) >= n) {
          return {x1 - u, y1 - v, x1 - su, y1 - sv};
        }
      }
    }
    // Unreachable: the searches always meet by max_d.
    throw GraderError(ErrorCode::InvalidArgument, "diff search did not converge");
  }

  Lines a_, b_;
  std::ptrdiff_t offset_;
  std::ptrdiff_t* forward_ = nullptr;
  std::ptrdiff_t* reverse_ = nullptr;
  std::vector<EditOp> ops_;

  // Buffers kept per thread so repeated calls do not reallocate.
  struct Scratch {
    std::vector<std::ptrdiff_t> v;
    std::vector<std::ptrdiff_t> pending;
    std::vector<std::ptrdiff_t> trace;
    std::vector<EditKind> kinds;
  };
  static Scratch& thread_scratch() {
    thread_local Scratch scratch;
    return scratch;
  }
  Scratch& scratch_ = thread_scratch();
  std::vector<std::ptrdiff_t>& pending_ = scratch_.pending;
  std::vector<std::ptrdiff_t>& trace_ = scratch_.trace;
  std::vector<EditKind>& kinds_ = scratch_.kinds;
};

std::string hunk_range(std::size_t start, std::size_t len) {
  return std::to_string(start) + "," + std::to_string(len);
}

}  // namespace

std::size_t EditScript::edit_count() const {
  return static_cast<std::size_t>(std::count_if(
      ops.begin(), ops.end(), [](const EditOp& op) { return op.kind != EditKind::Keep; }));
}

EditScript myers_diff(std::span<const std::string> a, std::span<const std::string> b) {
  return EditScript{MyersSolver(a, b).solve()};
}

std::vector<std::string> apply_script(std::span<const std::string> a, const EditScript& script) {
  std::vector<std::string> out;
  out.reserve(a.size());
  std::size_t i = 0;
  for (std::size_t n = 0; n < script.ops.size(); ++n) {
    const EditOp& op = script.ops[n];
    if (op.kind == EditKind::Insert) {
      out.push_back(op.line);
      continue;
    }
    if (i >= a.size() || a[i] != op.line) {
      throw GraderError(ErrorCode::ScriptMismatch,
                        "edit " + std::to_string(n) + " does not match source line " + std::to_string(i + 1));
    }
    if (op.kind == EditKind::Keep) out.push_back(a[i]);
    ++i;
  }
  if (i != a.size()) {
    throw GraderError(ErrorCode::ScriptMismatch,
                      "script consumed " + std::to_string(i) + " of " + std::to_string(a.size()) + " source lines");
  }
  return out;
}

std::vector<DiffHunk> make_hunks(const EditScript& script, std::size_t context) {
  const auto& ops = script.ops;
  std::vector<DiffHunk> hunks;

  // Source/destination line index reached before each op.
  std::vector<std::size_t> src_at(ops.size() + 1), dst_at(ops.size() + 1);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    src_at[i + 1] = src_at[i] + (ops[i].kind != EditKind::Insert ? 1 : 0);
    dst_at[i + 1] = dst_at[i] + (ops[i].kind != EditKind::Delete ? 1 : 0);
  }

  std::size_t i = 0;
  while (i < ops.size()) {
    if (ops[i].kind == EditKind::Keep) {
      ++i;
      continue;
    }
    const std::size_t begin = i >= context ? i - context : 0;
    // Extend over changes separated by at most 2 * context kept lines.
    std::size_t last_change = i;
    std::size_t j = i + 1;
    while (j < ops.size()) {
      if (ops[j].kind != EditKind::Keep) {
        last_change = j;
        ++j;
        continue;
      }
      std::size_t gap_end = j;
      while (gap_end < ops.size() && ops[gap_end].kind == EditKind::Keep) ++gap_end;
      if (gap_end < ops.size() && gap_end - j <= 2 * context) {
        j = gap_end;
      } else {
        break;
      }
    }
    const std::size_t end = std::min(ops.size(), last_change + 1 + context);

    DiffHunk hunk;
    hunk.src_len = src_at[end] - src_at[begin];
    hunk.dst_len = dst_at[end] - dst_at[begin];
    hunk.src_start = hunk.src_len == 0 ? src_at[begin] : src_at[begin] + 1;
    hunk.dst_start = hunk.dst_len == 0 ? dst_at[begin] : dst_at[begin] + 1;
    for (std::size_t k = begin; k < end; ++k) {
      const char marker = ops[k].kind == EditKind::Keep ? ' ' : ops[k].kind == EditKind::Delete ? '-' : '+';
      hunk.lines.push_back({marker, ops[k].line});
    }
    hunks.push_back(std::move(hunk));
    i = end;
  }
  return hunks;
}

std::string render_unified(const EditScript& script, std::size_t context, std::size_t max_lines) {
  if (max_lines == 0) max_lines = 1;
  std::vector<std::string> lines;
  for (const auto& hunk : make_hunks(script, context)) {
    lines.push_back("@@ -" + hunk_range(hunk.src_start, hunk.src_len) + " +" +
                    hunk_range(hunk.dst_start, hunk.dst_len) + " @@");
    for (const auto& line : hunk.lines) lines.push_back(line.marker + line.text);
  }

  std::string out;
  const std::size_t shown = std::min(lines.size(), max_lines);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i != 0) out += '\n';
    out += lines[i];
  }
  if (lines.size() > shown) {
    out += "\n... " + std::to_string(lines.size() - shown) + " more diff lines not shown";
  }
  return out;
}

}  // namespace autograder::diff
