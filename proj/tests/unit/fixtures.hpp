#pragma once

#include <cmath>

#include "cbcond/mechanism.hpp"

namespace fixtures {

inline constexpr double kLn2 = 0.69314718055994530942;

// psi(l) = 0.7 l + l^2 / 2 + 0.2 Gamma(-1.5) l^1.5
inline cbcond::BranchingMechanism mixed() {
  return {0.7, 1.0, cbcond::LevyMeasure::power_law(0.2, 1.5)};
}

// Values for mixed() computed with mpmath at 30 digits.
namespace mixed_ref {
inline constexpr double psi2 = 4.7368684131365336012884081519;
inline constexpr double psi_prime2 = 3.70265130985240020096630611392;
inline constexpr double phi1 = 0.934710809784543596845858058596;
inline constexpr double varphi1 = 0.898797497840819528710490113124;
inline constexpr double u_1_1 = 0.271033425663102436633250266468;
inline constexpr double W05 = 0.50972781085517199168427783682;
inline constexpr double W1 = 0.740384620649836798830891841246;
inline constexpr double W3 = 1.06211438520226639288707813703;
inline constexpr double Wp05 = 0.627356489076535466355931752884;
inline constexpr double Wp1 = 0.338675430862363607817804547052;
inline constexpr double Wp3 = 0.0750092713664508247838927488471;
inline constexpr double mass1 = 1.50618736903403820814702905169;
inline constexpr double potential_integral = 0.82709256692690287472629113213;
inline constexpr double xlogx = 0.8;
}  // namespace mixed_ref

inline cbcond::BranchingMechanism quadratic_triplet() { return {0.0, 2.0, cbcond::LevyMeasure::none()}; }
inline cbcond::BranchingMechanism lpq_triplet() { return {1.0, 2.0, cbcond::LevyMeasure::none()}; }

// psi(l) = l^1.5 from its Levy triplet: c = 1 / Gamma(-1.5).
inline cbcond::BranchingMechanism stable15_triplet() {
  return {0.0, 0.0, cbcond::LevyMeasure::power_law(1.0 / std::tgamma(-1.5), 1.5)};
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace fixtures
