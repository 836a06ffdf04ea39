#pragma once

#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "pdn/contact.hpp"
#include "pdn/dynamics.hpp"
#include "pdn/fem.hpp"

namespace pdn {

// ---------------------------------------------------------------------------
// Message protocol, schema v1. Within one step (and each reset iteration)
// the wire order is fixed:
//   StepSync        deformable -> rigid
//   SurfaceData     deformable -> rigid   (localization)
//   ProjectionData  rigid      -> deformable
//   ContactForces   deformable -> rigid
//   ResetFlag       deformable -> rigid
// A step completes only once ResetFlag{false} is delivered.
// ---------------------------------------------------------------------------

struct StepSync {
    long long step = 0;
    double time = 0.0;
    double dt = 0.0;
};

struct SurfaceData {
    long long step = 0;
    std::vector<Vec3> positions;          // current slave surface node positions
    std::vector<std::uint8_t> constrained;
    std::vector<std::uint8_t> excluded;   // released during this step's resets
};

struct ProjectionData {
    long long step = 0;
    std::vector<Projection> projections;
};

struct ContactForces {
    long long step = 0;
    std::vector<Index> nodes;
    std::vector<Vec3> forces;
};

struct ResetFlag {
    long long step = 0;
    bool reset = false;
};

using Message = std::variant<StepSync, SurfaceData, ProjectionData, ContactForces, ResetFlag>;

const char* message_name(const Message& m);

/// Synchronous rendezvous channel: send() blocks until the peer has consumed
/// the message; order is preserved; close() wakes both sides.
class Channel {
public:
    void send(Message m);
    Message receive();
    void close();

private:
    std::mutex mtx_;
    std::condition_variable cv_;
    std::optional<Message> slot_;
    bool closed_ = false;
};

/// receive() + type check; throws DesyncError naming expected vs got.
template <typename T>
T expect_message(Channel& ch, const char* expected) {
    Message m = ch.receive();
    if (auto* p = std::get_if<T>(&m)) return std::move(*p);
    throw DesyncError(std::string("protocol desync: expected ") + expected + ", got " +
                      message_name(m));
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

/// Nodal Dirichlet constraints of the deformable instance (clamps and
/// fixed-direction supports). Masked dofs hold d = v = a = 0.
struct BoundaryConditions {
    std::vector<std::uint8_t> fixed;  // 3n mask

    void resize(Index nodes) { fixed.assign(nodes * 3, 0); }
    void fix_node(Index n) { fixed[3 * n] = fixed[3 * n + 1] = fixed[3 * n + 2] = 1; }
    void fix_dof(Index n, int dof) { fixed[3 * n + dof] = 1; }
};

class DeformableInstance {
public:
    DeformableInstance(std::shared_ptr<Discretization> disc, BoundaryConditions bc,
                       std::vector<Index> slave_surface_nodes, Vec3 gravity);

    KinematicState& state() { return state_; }
    const KinematicState& state() const { return state_; }
    Discretization& discretization() { return *disc_; }
    const std::vector<Index>& surface_nodes() const { return surface_; }

    void set_initial_velocity(const Vec3& v);

    /// Runs the per-step deformable branch against the rigid peer on `ch_*`.
    /// Returns per-step statistics.
    struct StepStats {
        int resets = 0;
        Index n_constrained = 0;
        Index n_released = 0;
        Vec3 contact_force_total;  // sum of reactions (global frame)
        double f_normal = 0.0;     // sum of f . n
        double f_t1 = 0.0, f_t2 = 0.0;
        double w_external = 0.0;   // cumulative external work
        double w_contact = 0.0;    // cumulative contact work
    };
    StepStats step(Channel& to_rigid, Channel& from_rigid, long long step_index, double dt,
                   Scheme scheme, double phi);

    /// Largest end-of-step penetration (diagnostic, >= 0 means none).
    double worst_gap() const { return worst_gap_; }
    const std::vector<Projection>& active_projections() const { return active_; }
    const std::vector<Vec3>& active_reactions() const { return reactions_; }
    double exchange_seconds() const { return exchange_seconds_; }

private:
    std::shared_ptr<Discretization> disc_;
    KinematicState state_;
    BoundaryConditions bc_;
    std::vector<Index> surface_;
    Vec3 gravity_;

    std::vector<std::uint8_t> constrained_mask_;  // per surface list entry
    std::vector<Projection> active_;
    std::vector<Vec3> reactions_;
    double w_external_ = 0.0, w_contact_ = 0.0;
    double worst_gap_ = 0.0;
    double exchange_seconds_ = 0.0;
};

/// Rigid instance: surface + point mass, free (RK4) or prescribed motion.
/// On the wire, projections address slave nodes by their index in the
/// surface list; the deformable resolves indices to its node ids.
class RigidInstance {
public:
    enum class Motion { Free, Prescribed };

    RigidInstance(MasterSurface surface, RigidBodyState body);
    /// prescribed(t) is the rigid translation at time t (zero at t = 0).
    RigidInstance(MasterSurface surface, std::function<Vec3(double)> prescribed);

    RigidBodyState& body() { return body_; }
    const RigidBodyState& body() const { return body_; }
    const MasterSurface& surface() const { return master_; }
    Vec3 current_translation() const { return master_.translation(); }
    long long ambiguous_projections() const { return ambiguous_; }
    double projection_seconds() const { return projection_seconds_; }

    /// Serves exactly one complete time step (including its reset loop).
    /// Throws ChannelClosedError at shutdown.
    void serve_step(Channel& to_deformable, Channel& from_deformable);

private:
    MasterSurface master_;
    Motion motion_;
    RigidBodyState body_;
    Vec3 pos0_;
    std::function<Vec3(double)> prescribed_;
    ContactForces last_forces_;
    long long expected_step_ = 0;
    long long ambiguous_ = 0;
    double projection_seconds_ = 0.0;
};

// ---------------------------------------------------------------------------
// Coupled driver
// ---------------------------------------------------------------------------

struct HistoryRow {
    long long step = 0;
    double t = 0.0;
    double f_n = 0.0, f_t1 = 0.0, f_t2 = 0.0;
    double d_striker = 0.0;
    Vec3 striker_pos, striker_vel;
    double ke = 0.0, ie = 0.0, de = 0.0;
    double w_ext = 0.0, w_con = 0.0;
    double ke_striker = 0.0;
    Index n_contact = 0;
    int resets = 0;
    Index released = 0;
};

struct RunHistory {
    std::vector<HistoryRow> rows;
    double dt = 0.0;
    long long steps = 0;
    double energy_residual = 0.0;  // |w_ext + w_con - (ke + ie + de)| at end
    double worst_gap = 0.0;
    long long ambiguous_projections = 0;
};

/// Per-output-step callback (snapshots etc.); return false to stop early.
using OutputCallback = std::function<bool(const HistoryRow&, const DeformableInstance&)>;

/// Runs the two instances in lock-step over in-memory channels until t_end.
RunHistory run_coupled(RigidInstance& rigid, DeformableInstance& deformable,
                       const TimeLoopConfig& cfg, const OutputCallback& on_output = {});

} // namespace pdn
