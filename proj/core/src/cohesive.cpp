#include "pdn/cohesive.hpp"

#include <cmath>

namespace pdn {

Vec3 cohesive_update(const Vec3& jump, CohesivePointState& s, const CohesiveProps& p) {
    const double d1 = jump.x, d2 = jump.y, d3 = jump.z;
    const double dsh2 = d1 * d1 + d2 * d2;
    const double open = macaulay(d3);
    const double lambda = std::sqrt(open * open + dsh2);

    // local mixed-mode ratio and B-K interpolated onset/propagation jumps
    const double denom = dsh2 + open * open;
    const double B = denom > 0.0 ? dsh2 / denom : 0.0;
    const double Beta = std::pow(B, p.eta);
    const double o1 = p.onset_I(), o2 = p.onset_II();
    const double c1 = p.crit_I(), c2 = p.crit_II();
    const double lo = std::sqrt(o1 * o1 + (o2 * o2 - o1 * o1) * Beta);
    const double lc = (o1 * c1 + (o2 * c2 - o1 * c1) * Beta) / lo;

    if (lambda > s.r) s.r = lambda;
    if (s.r > lo) {
        const double D = clamp01(lc * (s.r - lo) / (s.r * (lc - lo)));
        if (D > s.D) s.D = D;
    }

    Vec3 t;
    t.x = (1.0 - s.D) * p.K * d1;
    t.y = (1.0 - s.D) * p.K * d2;
    t.z = (1.0 - s.D) * p.K * open + p.K * std::min(d3, 0.0);
    return t;
}

double cohesive_recoverable(const Vec3& jump, const CohesivePointState& s,
                            const CohesiveProps& p) {
    const double open = macaulay(jump.z);
    const double close = std::min(jump.z, 0.0);
    const double el = (1.0 - s.D) * p.K *
                      (jump.x * jump.x + jump.y * jump.y + open * open);
    return 0.5 * (el + p.K * close * close);
}

double cohesive_time_step(const CohesiveProps& p) { return std::sqrt(p.rho_bar / p.K); }

double penalty_stiffness_min(double E_T, double t_lam) { return 50.0 * E_T / t_lam; }

ElintKinematics elint_kinematics(const std::array<Vec3, 8>& x, const Vec3& stacking) {
    ElintKinematics kin;
    const Vec3 e1 = x[1] - x[0];
    const Vec3 e2 = x[3] - x[0];
    Vec3 n = normalized(cross(e1, e2));
    if (dot(n, stacking) < 0.0) n = -n;
    const Vec3 t1 = normalized(e1 - dot(e1, n) * n);
    const Vec3 t2 = cross(n, t1);
    for (int j = 0; j < 3; ++j) {
        kin.R(0, j) = t1[j];
        kin.R(1, j) = t2[j];
        kin.R(2, j) = n[j];
    }

    // Newton-Cotes weights: surface Jacobian of the bottom facet at each
    // corner of the reference square
    static const double corner[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    for (int i = 0; i < 4; ++i) {
        const double xi = corner[i][0], eta = corner[i][1];
        Vec3 dxi{}, deta{};
        static const double sx[4] = {-1, 1, 1, -1};
        static const double sy[4] = {-1, -1, 1, 1};
        for (int a = 0; a < 4; ++a) {
            const double dNdxi = 0.25 * sx[a] * (1.0 + sy[a] * eta);
            const double dNdeta = 0.25 * sy[a] * (1.0 + sx[a] * xi);
            dxi += dNdxi * x[a];
            deta += dNdeta * x[a];
        }
        kin.w[i] = norm(cross(dxi, deta));
    }
    return kin;
}

std::array<Vec3, 4> elint_jumps(const ElintKinematics& kin,
                                const std::array<Vec3, 8>& node_displacement) {
    std::array<Vec3, 4> out;
    for (int i = 0; i < 4; ++i)
        out[i] = kin.R * (node_displacement[4 + i] - node_displacement[i]);
    return out;
}

} // namespace pdn
