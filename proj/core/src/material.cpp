#include "pdn/material.hpp"

#include <cmath>

namespace pdn {

double neo_hookean_energy(const Mat3& F, const NeoHookeanProps& p) {
    const double J = det(F);
    if (J <= 0.0) throw InvertedElementError("neo-Hookean: det F <= 0");
    const Mat3 C = transpose(F) * F;
    const double I1 = C(0, 0) + C(1, 1) + C(2, 2);
    const double I1bar = std::pow(J, -2.0 / 3.0) * I1;
    return 0.5 * p.mu() * (I1bar - 3.0) + 0.5 * p.kappa() * (J - 1.0) * (J - 1.0);
}

Mat3 neo_hookean_stress(const Mat3& F, const NeoHookeanProps& p) {
    const double J = det(F);
    if (J <= 0.0) throw InvertedElementError("neo-Hookean: det F <= 0");
    const Mat3 C = transpose(F) * F;
    const Mat3 Cinv = inverse(C);
    const double I1 = C(0, 0) + C(1, 1) + C(2, 2);
    const double Jm23 = std::pow(J, -2.0 / 3.0);
    Mat3 S;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double id = (i == j) ? 1.0 : 0.0;
            S(i, j) = p.mu() * Jm23 * (id - I1 / 3.0 * Cinv(i, j)) +
                      p.kappa() * (J - 1.0) * J * Cinv(i, j);
        }
    return S;
}

TransverseIsotropicProps as4_8552() {
    TransverseIsotropicProps p;
    p.E11 = 128.0e3; p.E22 = 7.63e3; p.nu12 = 0.35; p.nu23 = 0.45;
    p.G12 = 4.358e3; p.G23 = 2.631e3;
    p.XT = 2300.0; p.XC = 1531.0; p.YT = 74.2; p.YC = 199.8; p.SL = 94.36;
    p.GXT = 81.5; p.GXC = 106.3; p.GYT = 0.28; p.GYC = 1.313; p.GSL = 0.79;
    p.fXT = 0.1; p.fGT = 0.6; p.fXC = 0.1; p.fGC = 0.9;
    p.Sp = 62.0; p.Kp = 0.1936;
    p.rho = 1.59e-9;
    p.alpha0 = 53.0;
    return p;
}

TransverseIsotropicProps t800s_m21() {
    TransverseIsotropicProps p;
    p.E11 = 138.4e3; p.E22 = 8.54e3; p.nu12 = 0.311; p.nu23 = 0.45;
    p.G12 = 4.29e3; p.G23 = 2.945e3;
    p.XT = 2854.0; p.XC = 1109.0; p.YT = 56.6; p.YC = 250.0; p.SL = 93.7;
    p.GXT = 340.0; p.GXC = 60.0; p.GYT = 0.308; p.GYC = 1.38; p.GSL = 0.828;
    p.fXT = 0.1; p.fGT = 0.6; p.fXC = 0.1; p.fGC = 0.9;
    p.Sp = 66.9; p.Kp = 0.09;
    p.rho = 1.59e-9;
    p.alpha0 = 53.0;
    return p;
}

TransverseIsotropicProps isotropic_elastic(double E, double nu, double rho) {
    TransverseIsotropicProps p;
    p.E11 = p.E22 = E;
    p.nu12 = p.nu23 = nu;
    p.G12 = p.G23 = E / (2.0 * (1.0 + nu));
    p.rho = rho;
    // strengths/toughnesses unused on the elastic path; keep them harmless
    p.XT = p.XC = p.YT = p.YC = p.SL = 1e30;
    p.GXT = p.GXC = p.GYT = p.GYC = p.GSL = 1e30;
    p.Sp = 1e30;
    return p;
}

Mat6 compliance_matrix(const TransverseIsotropicProps& p) {
    Mat6 H;
    H(0, 0) = 1.0 / p.E11;
    H(0, 1) = H(1, 0) = H(0, 2) = H(2, 0) = -p.nu12 / p.E11;
    H(1, 1) = H(2, 2) = 1.0 / p.E22;
    H(1, 2) = H(2, 1) = -p.nu23 / p.E22;
    H(3, 3) = 1.0 / p.G23;
    H(4, 4) = H(5, 5) = 1.0 / p.G12;
    return H;
}

Mat6 effective_stiffness(const TransverseIsotropicProps& p) {
    const Mat6 H = compliance_matrix(p);
    // normal 3x3 block inverted in closed form, shear block is diagonal
    Mat3 A;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = H(i, j);
    const Mat3 Ainv = inverse(A);
    Mat6 C;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) C(i, j) = Ainv(i, j);
    C(3, 3) = p.G23;
    C(4, 4) = C(5, 5) = p.G12;
    return C;
}

double wavespeed_stiffness_bound(const Mat6& C) {
    double best = 0.0;
    for (int i = 0; i < 6; ++i) {
        double row = 0.0;
        for (int j = 0; j < 6; ++j) row += std::abs(C(i, j));
        best = std::max(best, row);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Crack-band softening
// ---------------------------------------------------------------------------

SofteningLaw make_softening(double modulus, double strength, double toughness, double lc,
                            double fX, double fG) {
    SofteningLaw law;
    law.modulus = modulus;
    law.strength = strength;
    law.e0 = strength / modulus;
    const double g = toughness / lc;              // dissipation per unit volume
    const double ge = 0.5 * strength * law.e0;    // elastic part of the envelope area
    if (g <= ge * (1.0 + 1e-12)) {
        law.ek = law.ef = law.e0;
        law.sk = 0.0;
        law.clipped = true;
        return law;
    }
    const bool bilinear = fX > 0.0 && fX < 1.0 && fG > 0.0 && fG < 1.0 && fG * g < g - ge;
    if (bilinear) {
        law.sk = fX * strength;
        const double tail = fG * g;
        const double first = g - ge - tail;
        law.ek = law.e0 + 2.0 * first / (strength + law.sk);
        law.ef = law.ek + 2.0 * tail / law.sk;
    } else {
        law.sk = strength;
        law.ek = law.e0;
        law.ef = 2.0 * g / strength;
    }
    return law;
}

double SofteningLaw::damage(double r) const {
    if (r <= 1.0) return 0.0;
    const double eps = r * e0;
    double s;
    if (clipped) {
        s = 0.0;
    } else if (eps <= ek) {
        s = strength + (eps - e0) * (sk - strength) / (ek - e0);
    } else if (eps < ef) {
        s = sk * (ef - eps) / (ef - ek);
    } else {
        s = 0.0;
    }
    const double d = 1.0 - s / (modulus * eps);
    return clamp01(d);
}

IntralaminarMaterial::IntralaminarMaterial(const TransverseIsotropicProps& props, double lc)
    : props_(props), C_(effective_stiffness(props)), lc_(lc) {
    laws_[0] = make_softening(props.E11, props.XT, props.GXT, lc, props.fXT, props.fGT);
    laws_[1] = make_softening(props.E11, props.XC, props.GXC, lc, props.fXC, props.fGC);
    laws_[2] = make_softening(props.E22, props.YT, props.GYT, lc, -1, -1);
    laws_[3] = make_softening(props.E22, props.YC, props.GYC, lc, -1, -1);
}

std::string IntralaminarMaterial::snapback_violations() const {
    static const char* names[4] = {"fiber tension", "fiber compression", "matrix tension",
                                   "matrix compression"};
    std::string out;
    for (int i = 0; i < 4; ++i)
        if (laws_[i].clipped) {
            if (!out.empty()) out += ", ";
            out += names[i];
        }
    return out;
}

void check_crack_band(const TransverseIsotropicProps& props, double lc,
                      const std::string& context) {
    const IntralaminarMaterial m(props, lc);
    const std::string bad = m.snapback_violations();
    if (!bad.empty())
        throw SnapbackError("crack-band snap-back at lc = " + std::to_string(lc) + " mm (" +
                            context + "): " + bad +
                            "; refine the mesh so lc <= 2 G E / sigma^2 per mechanism");
}

Voigt IntralaminarMaterial::elastic_stress(const Voigt& strain) const {
    return C_ * strain;
}

Voigt IntralaminarMaterial::update(const Voigt& strain, IntraPointState& s) const {
    const auto& p = props_;

    // 1) in-plane shear plasticity, 1D return map with linear hardening
    {
        const double tau_tr = p.G12 * (strain[5] - s.gamma_p);
        const double yield = p.Sp + p.Kp * p.G12 * s.alpha_p;
        const double over = std::abs(tau_tr) - yield;
        if (over > 0.0) {
            const double dg = over / (p.G12 * (1.0 + p.Kp));
            s.gamma_p += (tau_tr >= 0.0 ? dg : -dg);
            s.alpha_p += dg;
        }
    }

    // 2) effective elastic strain, 3) effective stress
    Voigt ee = strain;
    ee[5] -= s.gamma_p;
    const Voigt se = C_ * ee;

    // 4) loading functions
    double phi[4];
    phi[0] = p.E11 * ee[0] / p.XT;
    phi[1] = macaulay(-se[0]) / p.XC;
    {
        const double t = macaulay(se[1]) / p.YT;
        const double sh = se[5] / p.SL;
        phi[2] = std::sqrt(t * t + sh * sh);
        const double c = macaulay(-se[1]) / p.YC;
        phi[3] = std::sqrt(c * c + sh * sh);
    }

    // 5) thresholds, 6) damage (both irreversible)
    for (int i = 0; i < 4; ++i) {
        if (phi[i] > s.r[i]) s.r[i] = phi[i];
        const double d = laws_[i].damage(s.r[i]);
        if (d > s.d[i]) s.d[i] = d;
    }

    // 7) nominal stress: component-wise degradation of the effective stress;
    // crack-closure by strain sign, Poisson coupling left undamaged
    const double D1 = (ee[0] >= 0.0) ? s.d[0] : s.d[1];
    const double D2 = (ee[1] >= 0.0) ? s.d[2] : s.d[3];
    const double D6 = s.d_shear();
    Voigt sig = se;
    sig[0] *= (1.0 - D1);
    sig[1] *= (1.0 - D2);
    sig[5] *= (1.0 - D6);
    return sig;
}

} // namespace pdn
