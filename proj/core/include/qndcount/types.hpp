#pragma once

#include <complex>
#include <numbers>
#include <string_view>

#include <Eigen/Dense>

namespace qndcount {

using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Result of one projective Rydberg-presence measurement.
enum class Outcome { NoRydberg = 0, Rydberg = 1 };

constexpr Outcome flip(Outcome m) {
  return m == Outcome::Rydberg ? Outcome::NoRydberg : Outcome::Rydberg;
}

std::string_view to_string(Outcome m);
Outcome outcome_from_string(std::string_view s);

// Probability weight of the two measurement sectors.
struct SectorPopulations {
  double no_rydberg = 1.0;
  double rydberg = 0.0;
};

// Angular frequency of the collective S_n <-> R_n coupling.
inline double collective_frequency(int n, double omega) {
  return std::sqrt(static_cast<double>(n)) * omega;
}

}  // namespace qndcount
