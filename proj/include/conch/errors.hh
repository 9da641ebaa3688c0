#ifndef CONCH_ERRORS_HH_
#define CONCH_ERRORS_HH_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace conch {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input violates a documented operation precondition.
struct PreconditionError : Error {
  using Error::Error;
};

// Malformed configuration: unbound atom, bad group, unknown option.
struct ConfigError : Error {
  using Error::Error;
};

// A search hit its node or time bound. The caller learned nothing about the
// verdict; checkers never turn this into an answer.
struct BudgetError : Error {
  BudgetError(const std::string& what, std::uint64_t limit_hit)
      : Error(what), limit(limit_hit) {}
  std::uint64_t limit;
};

struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line_no)
      : Error(std::to_string(line_no) + ": " + what), line(line_no) {}
  std::size_t line;
};

}  // namespace conch

#endif  // CONCH_ERRORS_HH_
