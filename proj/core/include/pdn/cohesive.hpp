#pragma once

#include <array>

#include "pdn/common.hpp"

namespace pdn {

/// Mixed-mode bilinear cohesive law with a single penalty stiffness for all
/// components and Benzeggagh-Kenane interpolation of onset/propagation.
struct CohesiveProps {
    double GIc = 0, GIIc = 0;   // N/mm
    double tauI = 0, tauII = 0; // MPa
    double eta = 1;             // B-K exponent
    double K = 0;               // penalty stiffness, N/mm^3
    double rho_bar = 0;         // surface density, t/mm^2

    double onset_I() const { return tauI / K; }
    double onset_II() const { return tauII / K; }
    double crit_I() const { return 2.0 * GIc / tauI; }
    double crit_II() const { return 2.0 * GIIc / tauII; }
};

/// Damage state at one Newton-Cotes point of an interface element.
struct CohesivePointState {
    double r = 0;  // max mixed-mode equivalent jump seen (mm)
    double D = 0;  // damage
};

/// Local jump -> local traction. Components (1,2) tangential, 3 normal.
/// Tangential and the opening part of the normal jump carry (1-D) K;
/// the closing part carries the undamaged penalty.
Vec3 cohesive_update(const Vec3& jump, CohesivePointState& state, const CohesiveProps& p);

/// Recoverable energy density of the current state (per unit area).
double cohesive_recoverable(const Vec3& jump, const CohesivePointState& state,
                            const CohesiveProps& p);

/// Stable time increment contributed by the interface: sqrt(rho_bar / K).
double cohesive_time_step(const CohesiveProps& p);

/// Minimum penalty stiffness that keeps the laminate compliance unaffected:
/// 50 E_T / t_lam.
double penalty_stiffness_min(double E_T, double t_lam);

/// Displacement jumps of an ELINT8 at its 4 Newton-Cotes (corner) points,
/// rotated into the mid-plane frame computed from the reference geometry.
/// rows of R: t1, t2, n with n oriented along `stacking`.
struct ElintKinematics {
    Mat3 R;                       // global -> local rotation
    std::array<double, 4> w{};    // integration weights (area)
};

ElintKinematics elint_kinematics(const std::array<Vec3, 8>& x_ref, const Vec3& stacking);

std::array<Vec3, 4> elint_jumps(const ElintKinematics& kin,
                                const std::array<Vec3, 8>& node_displacement);

} // namespace pdn
