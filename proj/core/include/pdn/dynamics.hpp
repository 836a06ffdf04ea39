#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "pdn/common.hpp"
#include "pdn/errors.hpp"

namespace pdn {

enum class Scheme { TW, CD };

Scheme scheme_from_name(const std::string& name);

/// Time-loop policy. dt_fixed <= 0 selects the automatic step
/// safety * dt_stable, recomputed every recompute_every steps.
struct TimeLoopConfig {
    double t_end = 0.0;
    Scheme scheme = Scheme::TW;
    double phi = 1.033;
    double dt_fixed = -1.0;
    double dt_safety = 0.9;
    int recompute_every = 100;
    int output_every = 1;
    long long max_steps = -1;
};

/// Kick/drift phase of the explicit update, before force re-assembly.
/// TW:  v += dt a;  d += dt v_old + phi dt^2 a
/// CD:  v += dt/2 a; d += dt v_half  (velocity Verlet)
void scheme_predict(Scheme s, double phi, double dt, std::vector<double>& d,
                    std::vector<double>& v, const std::vector<double>& a);

/// Completion after the new acceleration is known (CD second half-kick).
void scheme_correct(Scheme s, double dt, std::vector<double>& v,
                    const std::vector<double>& a_new);

/// Coefficient of a in the displacement update; inverting it turns a
/// constrained displacement into the effective acceleration it implies.
double scheme_disp_coeff(Scheme s, double phi, double dt);

/// Classical 4th-order Runge-Kutta for anything supporting y + s*k.
template <typename State, typename Deriv>
State rk4_generic(const State& y, double t, double dt, Deriv f) {
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * dt, y + (0.5 * dt) * k1);
    const State k3 = f(t + 0.5 * dt, y + (0.5 * dt) * k2);
    const State k4 = f(t + dt, y + dt * k3);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Rigid instance: a point mass with translation dofs only.
struct RigidBodyState {
    double mass = 0.0;                 // tonne
    Vec3 pos, vel, acc;                // mm, mm/s, mm/s^2
    Vec3 gravity;                      // mm/s^2
    Vec3 f_contact;                    // accumulated contact force, N
    std::array<bool, 3> fixed{false, false, false};
};

/// One RK4 step of (pos, vel) with vdot = g - f_contact/m held constant over
/// the step. Fixed dofs keep their pre-step position and zero velocity.
void rk4_step(RigidBodyState& body, double dt);

double kinetic_energy(const std::vector<double>& m, const std::vector<double>& v);

/// Throws NonFiniteError naming `what` and the step if any entry is not finite.
void check_finite(const std::vector<double>& x, const char* what, long long step);

/// Energy bookkeeping of one run, filled at output cadence.
struct EnergyReport {
    double kinetic = 0.0;
    double internal = 0.0;
    double dissipated = 0.0;
    double external_work = 0.0;
    double contact_work = 0.0;
};

} // namespace pdn
