#include "autograder/diagnostic.hpp"

#include <algorithm>

namespace autograder {

Diagnostic warning(std::string message, std::string path) {
  return {Severity::Warning, std::move(message), std::move(path)};
}

Diagnostic error(std::string message, std::string path) {
  return {Severity::Error, std::move(message), std::move(path)};
}

bool has_errors(std::span<const Diagnostic> diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string format(const Diagnostic& diagnostic) {
  std::string out = diagnostic.severity == Severity::Error ? "error: " : "warning: ";
  out += diagnostic.message;
  if (!diagnostic.path.empty()) {
    out += " (" + diagnostic.path + ")";
  }
  return out;
}

std::ostream& operator<<(std::ostream& out, const Diagnostic& diagnostic) {
  return out << format(diagnostic);
}

}  // namespace autograder
