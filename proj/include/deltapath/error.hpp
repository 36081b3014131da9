#ifndef DELTAPATH_ERROR_HPP
#define DELTAPATH_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace deltapath {

enum class Errc {
  UnknownNode,
  UnknownLink,
  DuplicateLink,
  DuplicateNode,
  AmbiguousLink,
  InvalidLink,
  NegativeMultiplicity,
  InvalidWeight,
  UnknownStrategy,
  NonConvergence,
  Unreachable,
  CycleDetected,
  SyntaxError,
  NoBackup,
  UnknownPolicy,
  TooLarge,
  OddArity,
  Infeasible,
  ParseError,
  VerifyMismatch,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error
{
public:
  Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what)
    , m_code(code)
  {
  }

  Errc
  code() const noexcept
  {
    return m_code;
  }

private:
  Errc m_code;
};

} // namespace deltapath

#endif // DELTAPATH_ERROR_HPP
