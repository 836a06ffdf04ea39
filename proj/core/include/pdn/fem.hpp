#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "pdn/cohesive.hpp"
#include "pdn/common.hpp"
#include "pdn/material.hpp"
#include "pdn/mesh.hpp"
#include "pdn/thread_pool.hpp"

namespace pdn {

/// Nodal arrays of one deformable instance. All vectors are 3 * node_count;
/// lumped mass is strictly positive once a solver is initialized.
struct KinematicState {
    std::vector<double> d, v, a, m;
    std::vector<double> f_int, f_ext, f_con;
    double time = 0.0;

    Index node_count() const { return static_cast<Index>(d.size()) / 3; }
    void resize(Index nodes);
};

struct BulkMaterial {
    enum class Model { NeoHookean, Elastic, Damage };
    Model model = Model::NeoHookean;
    NeoHookeanProps nh;
    TransverseIsotropicProps ti;

    double density() const { return model == Model::NeoHookean ? nh.rho : ti.rho; }
};

struct MaterialTable {
    std::map<int, BulkMaterial> bulk;        // material id -> bulk model
    std::map<int, CohesiveProps> interface;  // material id -> cohesive law
};

/// Total-Lagrangian discretization: precomputed reference-gradient kernels,
/// deterministic two-phase force assembly, lumped mass and the stable time
/// increment. Material damage states live here and can be snapshot for the
/// one-step contact rollback.
class Discretization {
public:
    Discretization(MeshModel mesh, MaterialTable materials, ThreadPool& pool);

    const MeshModel& mesh() const { return mesh_; }
    Index node_count() const { return mesh_.node_count_total(); }

    /// Row-sum lumped mass; entries of nodes untouched by bulk elements are 0
    /// (the caller decides whether that is an error).
    std::vector<double> lumped_mass() const;

    /// min over bulk elements of lc sqrt(rho / C_bound) and over interface
    /// materials of sqrt(rho_bar / K).
    double critical_time_step() const;

    /// Assembles f_int(d). Damage/plasticity states advance in place;
    /// bitwise identical result for any worker count.
    void assemble_internal(const std::vector<double>& d, std::vector<double>& f_int);

    /// Strain energy currently stored (recoverable) at the last assembly.
    double recoverable_energy() const;
    /// Damage + plastic dissipation accumulated up to the last assembly.
    double dissipated_energy() const;

    struct MaterialStates {
        std::vector<IntraPointState> intra;
        std::vector<CohesivePointState> coh;
        std::vector<double> ip_work;      // accumulated stress work per point
        std::vector<Voigt> ip_strain;     // last strain per bulk damage point
        std::vector<Voigt> ip_stress;     // last stress per bulk damage point
        std::vector<Vec3> coh_jump;       // last jump per cohesive point
        std::vector<Vec3> coh_traction;   // last traction per cohesive point
        std::vector<double> coh_work;     // accumulated traction work per point
        std::vector<double> elem_recoverable;
        std::vector<double> elem_dissipated;
    };
    MaterialStates snapshot_states() const { return states_; }
    void restore_states(MaterialStates s) { states_ = std::move(s); }

    /// Per-element damage fields for output (0 where not applicable).
    std::vector<double> field_d1() const;
    std::vector<double> field_d2() const;
    std::vector<double> field_cohesive_damage() const;
    /// Max cohesive damage over all interface points (0 if none).
    double max_cohesive_damage() const;

    bool has_damage() const;

    ThreadPool& pool() { return pool_; }
    double assembly_seconds() const { return assembly_seconds_; }

private:
    struct BulkElem {
        Index global_id = 0;
        std::array<Index, 8> conn{};
        int n_nodes = 0;
        int n_ip = 0;
        // reference gradients per ip per node, and ip weights
        std::array<std::array<Vec3, 8>, 8> dNdX{};
        std::array<double, 8> weight{};
        Mat3 Q;  // global -> material frame rotation (rows = material axes)
        const BulkMaterial* mat = nullptr;
        std::unique_ptr<IntralaminarMaterial> damage;  // bound to this lc
        Index state_offset = 0;  // into states_.intra / ip_* (damage only)
        double lc = 0;
        double rho = 0;
    };
    struct CohElem {
        Index global_id = 0;
        std::array<Index, 8> conn{};
        ElintKinematics kin;
        const CohesiveProps* props = nullptr;
        Index state_offset = 0;  // into states_.coh / coh_*
    };

    void assemble_element(std::size_t idx, const std::vector<double>& d);

    MeshModel mesh_;
    MaterialTable materials_;
    ThreadPool& pool_;

    std::vector<BulkElem> bulk_;
    std::vector<CohElem> coh_;
    std::vector<double> elem_force_;           // 24 per element slot
    std::vector<Index> elem_of_slot_;          // element list order
    // node gather: for each node, (slot, local_node) pairs sorted by element id
    std::vector<std::pair<Index, int>> incidence_;
    std::vector<Index> incidence_begin_;

    MaterialStates states_;
    double assembly_seconds_ = 0.0;
};

/// Trilinear shape function derivatives at (xi, eta, zeta), dN[a][j].
void hex8_shape_derivatives(double xi, double eta, double zeta, double dN[8][3]);

} // namespace pdn
