#include "pdn/dynamics.hpp"

#include <cmath>

namespace pdn {

double smooth_step(double t, double t0, double tE, double a0, double aE) {
    if (t <= t0) return a0;
    if (t >= tE) return aE;
    const double xi = (t - t0) / (tE - t0);
    return a0 + (aE - a0) * xi * xi * xi * (10.0 - 15.0 * xi + 6.0 * xi * xi);
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "tw" || name == "TW") return Scheme::TW;
    if (name == "cd" || name == "CD") return Scheme::CD;
    throw ConfigError("unknown time scheme '" + name + "' (expected tw or cd)");
}

void scheme_predict(Scheme s, double phi, double dt, std::vector<double>& d,
                    std::vector<double>& v, const std::vector<double>& a) {
    const std::size_t n = d.size();
    if (s == Scheme::TW) {
        for (std::size_t i = 0; i < n; ++i) {
            d[i] += dt * v[i] + phi * dt * dt * a[i];
            v[i] += dt * a[i];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            v[i] += 0.5 * dt * a[i];
            d[i] += dt * v[i];
        }
    }
}

void scheme_correct(Scheme s, double dt, std::vector<double>& v,
                    const std::vector<double>& a_new) {
    if (s != Scheme::CD) return;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += 0.5 * dt * a_new[i];
}

double scheme_disp_coeff(Scheme s, double phi, double dt) {
    return (s == Scheme::TW) ? phi * dt * dt : 0.5 * dt * dt;
}

namespace {

struct PosVel {
    Vec3 p, v;
};
PosVel operator+(const PosVel& a, const PosVel& b) { return {a.p + b.p, a.v + b.v}; }
PosVel operator*(double s, const PosVel& y) { return {s * y.p, s * y.v}; }

}  // namespace

void rk4_step(RigidBodyState& body, double dt) {
    const Vec3 accel = body.gravity - body.f_contact / body.mass;
    const PosVel y0{body.pos, body.vel};
    const PosVel y1 = rk4_generic(y0, 0.0, dt,
                                  [&](double, const PosVel& y) { return PosVel{y.v, accel}; });
    for (int i = 0; i < 3; ++i) {
        if (body.fixed[i]) {
            body.vel[i] = 0.0;
            body.acc[i] = 0.0;
        } else {
            body.pos[i] = y1.p[i];
            body.vel[i] = y1.v[i];
            body.acc[i] = accel[i];
        }
    }
}

double kinetic_energy(const std::vector<double>& m, const std::vector<double>& v) {
    double ke = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) ke += 0.5 * m[i] * v[i] * v[i];
    return ke;
}

void check_finite(const std::vector<double>& x, const char* what, long long step) {
    for (double v : x)
        if (!std::isfinite(v))
            throw NonFiniteError(std::string("non-finite ") + what + " at step " +
                                 std::to_string(step));
}

} // namespace pdn
