#include "deltapath/error.hpp"

namespace deltapath {

std::string_view
to_string(Errc code) noexcept
{
  switch (code) {
  case Errc::UnknownNode: return "UnknownNode";
  case Errc::UnknownLink: return "UnknownLink";
  case Errc::DuplicateLink: return "DuplicateLink";
  case Errc::DuplicateNode: return "DuplicateNode";
  case Errc::AmbiguousLink: return "AmbiguousLink";
  case Errc::InvalidLink: return "InvalidLink";
  case Errc::NegativeMultiplicity: return "NegativeMultiplicity";
  case Errc::InvalidWeight: return "InvalidWeight";
  case Errc::UnknownStrategy: return "UnknownStrategy";
  case Errc::NonConvergence: return "NonConvergence";
  case Errc::Unreachable: return "Unreachable";
  case Errc::CycleDetected: return "CycleDetected";
  case Errc::SyntaxError: return "SyntaxError";
  case Errc::NoBackup: return "NoBackup";
  case Errc::UnknownPolicy: return "UnknownPolicy";
  case Errc::TooLarge: return "TooLarge";
  case Errc::OddArity: return "OddArity";
  case Errc::Infeasible: return "Infeasible";
  case Errc::ParseError: return "ParseError";
  case Errc::VerifyMismatch: return "VerifyMismatch";
  }
  return "Unknown";
}

} // namespace deltapath
