#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace autograder {

enum class Severity { Warning, Error };

// A non-fatal finding. Error-level diagnostics make a question ungradable;
// warnings are informational.
struct Diagnostic {
  Severity severity = Severity::Warning;
  std::string message;
  std::string path;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

Diagnostic warning(std::string message, std::string path = {});
Diagnostic error(std::string message, std::string path = {});

bool has_errors(std::span<const Diagnostic> diagnostics);

// "warning: <message> (<path>)"
std::string format(const Diagnostic& diagnostic);
std::ostream& operator<<(std::ostream& out, const Diagnostic& diagnostic);

}  // namespace autograder
