#include "qndcount/types.hpp"

#include <string>

#include "qndcount/errors.hpp"

namespace qndcount {

std::string_view to_string(Outcome m) {
  return m == Outcome::Rydberg ? "Rydberg" : "NoRydberg";
}

Outcome outcome_from_string(std::string_view s) {
  if (s == "Rydberg" || s == "R" || s == "1") return Outcome::Rydberg;
  if (s == "NoRydberg" || s == "S" || s == "0") return Outcome::NoRydberg;
  throw DomainError("unknown measurement outcome '" + std::string(s) + "'");
}

}  // namespace qndcount
