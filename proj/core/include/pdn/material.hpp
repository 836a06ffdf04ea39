#pragma once

#include <array>
#include <string>

#include "pdn/common.hpp"
#include "pdn/errors.hpp"

namespace pdn {

// ---------------------------------------------------------------------------
// Bulk constitutive models. Stress measure is 2nd Piola-Kirchhoff, strain is
// Green strain in Voigt order (11,22,33,23,13,12) with engineering shears.
// ---------------------------------------------------------------------------

struct NeoHookeanProps {
    double E = 0;    // MPa
    double nu = 0;
    double rho = 0;  // t/mm^3

    double mu() const { return E / (2.0 * (1.0 + nu)); }
    double kappa() const { return E / (3.0 * (1.0 - 2.0 * nu)); }
};

/// Compressible neo-Hookean strain energy W = mu/2 (I1bar - 3) + kappa/2 (J-1)^2.
double neo_hookean_energy(const Mat3& F, const NeoHookeanProps& p);

/// PK2 stress of the energy above. Throws InvertedElementError if det F <= 0.
Mat3 neo_hookean_stress(const Mat3& F, const NeoHookeanProps& p);

/// Transversely isotropic ply constants (1 = fiber direction), strengths,
/// fracture toughnesses and softening-law shape factors. Shape factors < 0
/// mean "absent" and select a linear softening law.
struct TransverseIsotropicProps {
    double E11 = 0, E22 = 0, nu12 = 0, nu23 = 0, G12 = 0, G23 = 0;  // MPa, -
    double XT = 0, XC = 0, YT = 0, YC = 0, SL = 0;                  // MPa
    double GXT = 0, GXC = 0, GYT = 0, GYC = 0, GSL = 0;             // N/mm
    double fXT = -1, fGT = -1, fXC = -1, fGC = -1;                  // -
    double Sp = 0, Kp = 0;  // shear yield (MPa), hardening ratio (-)
    double rho = 0;         // t/mm^3
    double alpha0 = 53.0;   // deg, fracture angle (informational)
};

/// Table-like presets used by the benchmark scenarios.
TransverseIsotropicProps as4_8552();
TransverseIsotropicProps t800s_m21();

/// Isotropic constants expressed as a (degenerate) transversely isotropic set.
TransverseIsotropicProps isotropic_elastic(double E, double nu, double rho);

/// Compliance matrix H of the undamaged ply (Voigt, engineering shear).
Mat6 compliance_matrix(const TransverseIsotropicProps& p);

/// Effective stiffness C = H^-1; symmetric positive definite.
Mat6 effective_stiffness(const TransverseIsotropicProps& p);

/// Conservative dilatational-wavespeed stiffness bound used by the stable
/// time increment: max_i sum_j |C_ij| (reduces to E for isotropic nu = 0).
double wavespeed_stiffness_bound(const Mat6& C);

// ---------------------------------------------------------------------------
// Intralaminar damage (continuum damage mechanics with crack-band scaling)
// ---------------------------------------------------------------------------

/// Per-mechanism softening envelope regularized by the element length.
/// Bilinear with pivot (fX*strength, fG*G) when shape factors are present,
/// linear otherwise; degenerates to a vertical drop when the element is too
/// large for the crack band (clipped flag; scenario setup refuses such
/// pairings, see check_crack_band).
struct SofteningLaw {
    double modulus = 0;
    double strength = 0;
    double e0 = 0;  // onset strain
    double ek = 0;  // pivot strain
    double ef = 0;  // final strain
    double sk = 0;  // pivot stress
    bool clipped = false;

    /// Secant damage at threshold r (= phi history max, r >= 1 at onset).
    double damage(double r) const;
};

SofteningLaw make_softening(double modulus, double strength, double toughness, double lc,
                            double fX, double fG);

enum class Mechanism : int { FiberTension = 0, FiberCompression = 1, MatrixTension = 2,
                             MatrixCompression = 3 };

/// Damage state at one integration point.
struct IntraPointState {
    double gamma_p = 0;             // plastic engineering shear strain
    double alpha_p = 0;             // accumulated plastic flow
    std::array<double, 4> r{1, 1, 1, 1};   // thresholds, mechanisms above
    std::array<double, 4> d{0, 0, 0, 0};   // per-mechanism damage
    double d_shear() const { return 1.0 - (1.0 - d[2]) * (1.0 - d[3]); }
    double d1() const { return std::max(d[0], d[1]); }
    double d2() const { return std::max(d[2], d[3]); }
};

/// Element-bound intralaminar material: the four envelopes regularized to
/// one characteristic length.
class IntralaminarMaterial {
public:
    IntralaminarMaterial(const TransverseIsotropicProps& props, double lc);

    /// Algo-style update: plastic return map, effective stress, loading
    /// functions, threshold update, damage update, nominal stress.
    Voigt update(const Voigt& strain, IntraPointState& state) const;

    /// Elastic path (damage and plasticity off), used when a scenario
    /// disables damage.
    Voigt elastic_stress(const Voigt& strain) const;

    /// Names of mechanisms whose crack band snaps back at this length;
    /// empty when the pairing is valid.
    std::string snapback_violations() const;

    const TransverseIsotropicProps& props() const { return props_; }
    const Mat6& stiffness() const { return C_; }
    double lc() const { return lc_; }

private:
    TransverseIsotropicProps props_;
    Mat6 C_;
    double lc_ = 0;
    std::array<SofteningLaw, 4> laws_;
};

/// Throws SnapbackError if any mechanism of `props` at length `lc` violates
/// the crack-band limit lc <= 2 G E / sigma^2. Called by scenario setup.
void check_crack_band(const TransverseIsotropicProps& props, double lc,
                      const std::string& context);

} // namespace pdn
