#include "test_support.hpp"

#include "autograder/sandbox.hpp"

namespace test_support {

std::string grading_user_for_tests() {
  if (autograder::sandbox::lookup_user("ag")) return "ag";
  return "nobody";
}

}  // namespace test_support
