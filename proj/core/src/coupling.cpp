#include "pdn/coupling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>
#include <type_traits>
#include <unordered_map>

namespace pdn {

const char* message_name(const Message& m) {
    struct Visitor {
        const char* operator()(const StepSync&) const { return "StepSync"; }
        const char* operator()(const SurfaceData&) const { return "SurfaceData"; }
        const char* operator()(const ProjectionData&) const { return "ProjectionData"; }
        const char* operator()(const ContactForces&) const { return "ContactForces"; }
        const char* operator()(const ResetFlag&) const { return "ResetFlag"; }
    };
    return std::visit(Visitor{}, m);
}

void Channel::send(Message m) {
    std::unique_lock lk(mtx_);
    cv_.wait(lk, [&] { return closed_ || !slot_.has_value(); });
    if (closed_) throw ChannelClosedError("channel closed while sending");
    slot_.emplace(std::move(m));
    cv_.notify_all();
    cv_.wait(lk, [&] { return closed_ || !slot_.has_value(); });
    if (closed_ && slot_.has_value()) throw ChannelClosedError("channel closed before delivery");
}

Message Channel::receive() {
    std::unique_lock lk(mtx_);
    cv_.wait(lk, [&] { return closed_ || slot_.has_value(); });
    if (!slot_.has_value()) throw ChannelClosedError("channel closed while receiving");
    Message m = std::move(*slot_);
    slot_.reset();
    cv_.notify_all();
    return m;
}

void Channel::close() {
    std::lock_guard lk(mtx_);
    closed_ = true;
    cv_.notify_all();
}

// ---------------------------------------------------------------------------
// Deformable instance
// ---------------------------------------------------------------------------

DeformableInstance::DeformableInstance(std::shared_ptr<Discretization> disc,
                                       BoundaryConditions bc,
                                       std::vector<Index> slave_surface_nodes, Vec3 gravity)
    : disc_(std::move(disc)), bc_(std::move(bc)), surface_(std::move(slave_surface_nodes)),
      gravity_(gravity) {
    const Index n = disc_->node_count();
    state_.resize(n);
    state_.m = disc_->lumped_mass();
    for (Index i = 0; i < n; ++i)
        if (state_.m[3 * i] <= 0.0)
            throw MaterialError("node " + std::to_string(i + 1) +
                                " has zero lumped mass (not attached to any bulk element)");
    if (bc_.fixed.empty()) bc_.resize(n);

    for (std::size_t i = 0; i < state_.f_ext.size(); ++i)
        state_.f_ext[i] = state_.m[i] * gravity_[i % 3];
    disc_->assemble_internal(state_.d, state_.f_int);
    for (std::size_t i = 0; i < state_.a.size(); ++i)
        state_.a[i] = bc_.fixed[i] ? 0.0 : (state_.f_ext[i] - state_.f_int[i]) / state_.m[i];

    constrained_mask_.assign(surface_.size(), 0);
}

void DeformableInstance::set_initial_velocity(const Vec3& v) {
    for (Index i = 0; i < state_.node_count(); ++i)
        for (int c = 0; c < 3; ++c)
            if (!bc_.fixed[3 * i + c]) state_.v[3 * i + c] = v[c];
}

DeformableInstance::StepStats DeformableInstance::step(Channel& to_rigid, Channel& from_rigid,
                                                       long long step_index, double dt,
                                                       Scheme scheme, double phi) {
    const auto& X = disc_->mesh().nodes;
    const double coeff = scheme_disp_coeff(scheme, phi, dt);

    // one-step rollback snapshot
    const std::vector<double> d0 = state_.d, v0 = state_.v, a0 = state_.a;
    const std::vector<double> fi0 = state_.f_int;
    auto states0 = disc_->snapshot_states();

    std::vector<std::uint8_t> excluded(surface_.size(), 0);
    std::unordered_map<Index, std::size_t> surf_index;
    surf_index.reserve(surface_.size());
    for (std::size_t i = 0; i < surface_.size(); ++i) surf_index[surface_[i]] = i;

    StepStats stats;
    const Index livelock_bound = static_cast<Index>(surface_.size()) + 4;

    const auto timed = [this](auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            exchange_seconds_ +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } else {
            auto r = fn();
            exchange_seconds_ +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return r;
        }
    };

    for (;;) {
        timed([&] { to_rigid.send(StepSync{step_index, state_.time, dt}); });

        // localization: predicted end-of-step surface positions, so detection
        // constrains every node that would finish the step penetrated
        SurfaceData sd;
        sd.step = step_index;
        sd.positions.resize(surface_.size());
        sd.constrained = constrained_mask_;
        sd.excluded = excluded;
        for (std::size_t i = 0; i < surface_.size(); ++i) {
            const Index n = surface_[i];
            Vec3 p;
            for (int c = 0; c < 3; ++c) {
                const std::size_t k = 3 * n + c;
                p[c] = X[n][c] + d0[k] + dt * v0[k] + coeff * a0[k];
            }
            sd.positions[i] = p;
        }
        timed([&] { to_rigid.send(std::move(sd)); });

        ProjectionData pd = timed(
            [&] { return expect_message<ProjectionData>(from_rigid, "ProjectionData"); });
        if (pd.step != step_index)
            throw DesyncError("projection data for step " + std::to_string(pd.step) +
                              " while computing step " + std::to_string(step_index));
        active_ = std::move(pd.projections);
        for (Projection& pr : active_) pr.node = surface_[pr.node];  // index -> node id

        if (stats.resets > 0) {
            state_.d = d0;
            state_.v = v0;
            state_.a = a0;
            disc_->restore_states(states0);
        }

        scheme_predict(scheme, phi, dt, state_.d, state_.v, state_.a);
        for (std::size_t k = 0; k < bc_.fixed.size(); ++k)
            if (bc_.fixed[k]) {
                state_.d[k] = 0.0;
                state_.v[k] = 0.0;
            }

        // Dirichlet contact constraints: overwrite the normal component of
        // the update, keep tangential motion (frictionless)
        std::vector<Vec3> a_eff(active_.size());
        for (std::size_t j = 0; j < active_.size(); ++j) {
            const Projection& pr = active_[j];
            const Index n = pr.node;
            Vec3 x_tent;
            for (int c = 0; c < 3; ++c) x_tent[c] = X[n][c] + state_.d[3 * n + c];
            const Vec3 x_con = constrained_position(x_tent, pr);
            const Vec3 delta = x_con - x_tent;
            for (int c = 0; c < 3; ++c) {
                state_.d[3 * n + c] += delta[c];
                state_.v[3 * n + c] += (scheme == Scheme::TW ? dt / coeff : 0.5 * dt / coeff) *
                                       delta[c];
            }
            for (int c = 0; c < 3; ++c) a_eff[j][c] = a0[3 * n + c] + delta[c] / coeff;
        }

        disc_->assemble_internal(state_.d, state_.f_int);
        for (std::size_t k = 0; k < state_.a.size(); ++k)
            state_.a[k] = bc_.fixed[k] ? 0.0
                                       : (state_.f_ext[k] - state_.f_int[k]) / state_.m[k];
        scheme_correct(scheme, dt, state_.v, state_.a);
        if (scheme == Scheme::CD) {
            // constrained normal velocity stays consistent with the
            // kinematically imposed motion
            for (std::size_t j = 0; j < active_.size(); ++j) {
                const Index n = active_[j].node;
                const Vec3& nn = active_[j].n;
                double vn_target = 0.0, vn_now = 0.0;
                for (int c = 0; c < 3; ++c) {
                    vn_target += (v0[3 * n + c] + dt * a_eff[j][c]) * nn[c];
                    vn_now += state_.v[3 * n + c] * nn[c];
                }
                for (int c = 0; c < 3; ++c)
                    state_.v[3 * n + c] += (vn_target - vn_now) * nn[c];
            }
        }
        for (std::size_t k = 0; k < bc_.fixed.size(); ++k)
            if (bc_.fixed[k]) state_.v[k] = 0.0;

        // reactions at constrained nodes: m a_eff - (f_e - f_i) restricted to
        // the projection normal, step-start force basis
        reactions_.assign(active_.size(), Vec3{});
        std::vector<Index> nodes(active_.size());
        std::vector<Vec3> normals(active_.size());
        for (std::size_t j = 0; j < active_.size(); ++j) {
            const Index n = active_[j].node;
            nodes[j] = n;
            normals[j] = active_[j].n;
            double rn = 0.0;
            for (int c = 0; c < 3; ++c) {
                const std::size_t k = 3 * n + c;
                rn += (state_.m[k] * a_eff[j][c] - (state_.f_ext[k] - fi0[k])) *
                      active_[j].n[c];
            }
            reactions_[j] = rn * active_[j].n;
        }

        const ReleaseOutcome rel = release_nodes(nodes, reactions_, normals);

        ContactForces cf;
        cf.step = step_index;
        cf.nodes = nodes;
        cf.forces = reactions_;
        timed([&] { to_rigid.send(std::move(cf)); });
        timed([&] { to_rigid.send(ResetFlag{step_index, rel.reset}); });

        if (rel.reset) {
            ++stats.resets;
            stats.n_released += static_cast<Index>(rel.released.size());
            for (Index n : rel.released) {
                const auto it = surf_index.find(n);
                excluded[it->second] = 1;
            }
            if (stats.resets > livelock_bound)
                throw LivelockError("step " + std::to_string(step_index) + " reset " +
                                    std::to_string(stats.resets) +
                                    " times; constrained set is not shrinking");
            continue;
        }

        // commit
        check_finite(state_.d, "displacement", step_index);
        check_finite(state_.v, "velocity", step_index);

        double w_ext_inc = 0.0;
        for (std::size_t k = 0; k < state_.d.size(); ++k)
            w_ext_inc += state_.f_ext[k] * (state_.d[k] - d0[k]);
        w_external_ += w_ext_inc;
        double w_con_inc = 0.0;
        for (std::size_t j = 0; j < active_.size(); ++j) {
            const Index n = active_[j].node;
            for (int c = 0; c < 3; ++c)
                w_con_inc += reactions_[j][c] * (state_.d[3 * n + c] - d0[3 * n + c]);
        }
        w_contact_ += w_con_inc;

        std::fill(constrained_mask_.begin(), constrained_mask_.end(), 0);
        std::fill(state_.f_con.begin(), state_.f_con.end(), 0.0);
        worst_gap_ = 0.0;
        for (std::size_t j = 0; j < active_.size(); ++j) {
            const Index n = active_[j].node;
            constrained_mask_[surf_index[n]] = 1;
            for (int c = 0; c < 3; ++c) state_.f_con[3 * n + c] = reactions_[j][c];
            stats.contact_force_total += reactions_[j];
            stats.f_normal += dot(reactions_[j], active_[j].n);
            stats.f_t1 += dot(reactions_[j], active_[j].t1);
            stats.f_t2 += dot(reactions_[j], active_[j].t2);
            Vec3 x_now;
            for (int c = 0; c < 3; ++c) x_now[c] = X[n][c] + state_.d[3 * n + c];
            worst_gap_ = std::min(worst_gap_, dot(x_now - active_[j].point, active_[j].n));
        }
        stats.n_constrained = static_cast<Index>(active_.size());
        stats.w_external = w_external_;
        stats.w_contact = w_contact_;
        state_.time += dt;
        return stats;
    }
}

// ---------------------------------------------------------------------------
// Rigid instance
// ---------------------------------------------------------------------------

RigidInstance::RigidInstance(MasterSurface surface, RigidBodyState body)
    : master_(std::move(surface)), motion_(Motion::Free), body_(body), pos0_(body.pos) {}

RigidInstance::RigidInstance(MasterSurface surface, std::function<Vec3(double)> prescribed)
    : master_(std::move(surface)), motion_(Motion::Prescribed),
      prescribed_(std::move(prescribed)) {}

void RigidInstance::serve_step(Channel& to_deformable, Channel& from_deformable) {
    for (;;) {
        const StepSync sync = expect_message<StepSync>(from_deformable, "StepSync");
        if (sync.step != expected_step_)
            throw DesyncError("rigid instance at step " + std::to_string(expected_step_) +
                              " received StepSync for step " + std::to_string(sync.step));
        const SurfaceData sd = expect_message<SurfaceData>(from_deformable, "SurfaceData");
        if (sd.step != sync.step)
            throw DesyncError("SurfaceData step mismatch");

        // advance the rigid body first (Gauss-Seidel: freshest state is what
        // the deformable constrains against), then project
        const RigidBodyState body_before = body_;
        if (motion_ == Motion::Free) {
            Vec3 f{};
            for (const Vec3& fc : last_forces_.forces) f += fc;
            body_.f_contact = f;
            rk4_step(body_, sync.dt);
            master_.set_translation(body_.pos - pos0_);
        } else {
            master_.set_translation(prescribed_(sync.time + sync.dt));
        }

        ProjectionData pd;
        pd.step = sync.step;
        {
            const auto t0 = std::chrono::steady_clock::now();
            for (std::size_t i = 0; i < sd.positions.size(); ++i) {
                if (sd.excluded[i]) continue;
                bool amb = false;
                const Projection pr =
                    master_.project(sd.positions[i], static_cast<Index>(i), &amb);
                if (amb) ++ambiguous_;
                if (sd.constrained[i] || pr.gap < 0.0) pd.projections.push_back(pr);
            }
            projection_seconds_ +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        to_deformable.send(std::move(pd));

        last_forces_ = expect_message<ContactForces>(from_deformable, "ContactForces");
        const ResetFlag rf = expect_message<ResetFlag>(from_deformable, "ResetFlag");
        if (rf.reset) {
            body_ = body_before;  // reset symmetry: repeat the rigid step too
            continue;
        }
        ++expected_step_;
        return;
    }
}

// ---------------------------------------------------------------------------
// Coupled driver
// ---------------------------------------------------------------------------

RunHistory run_coupled(RigidInstance& rigid, DeformableInstance& deformable,
                       const TimeLoopConfig& cfg, const OutputCallback& on_output) {
    Channel to_rigid, to_deformable;

    double dt_stable = deformable.discretization().critical_time_step();
    double dt;
    if (cfg.dt_fixed > 0.0) {
        if (cfg.dt_fixed > dt_stable)
            throw ConfigError("fixed dt " + std::to_string(cfg.dt_fixed) +
                              " exceeds the stable increment " + std::to_string(dt_stable));
        dt = cfg.dt_fixed;
    } else {
        dt = cfg.dt_safety * dt_stable;
    }

    std::exception_ptr rigid_error;
    std::thread rigid_thread([&] {
        try {
            for (;;) rigid.serve_step(to_deformable, to_rigid);
        } catch (const ChannelClosedError&) {
            // normal shutdown
        } catch (...) {
            rigid_error = std::current_exception();
            to_rigid.close();
            to_deformable.close();
        }
    });

    RunHistory history;
    history.dt = dt;
    long long step = 0;
    try {
        while (deformable.state().time < cfg.t_end - 0.5 * dt &&
               (cfg.max_steps < 0 || step < cfg.max_steps)) {
            if (cfg.dt_fixed <= 0.0 && cfg.recompute_every > 0 && step > 0 &&
                step % cfg.recompute_every == 0) {
                dt_stable = deformable.discretization().critical_time_step();
                dt = cfg.dt_safety * dt_stable;
            }
            const auto stats =
                deformable.step(to_rigid, to_deformable, step, dt, cfg.scheme, cfg.phi);
            ++step;

            const bool is_output =
                (cfg.output_every <= 1) || (step % cfg.output_every == 0) ||
                deformable.state().time >= cfg.t_end - 0.5 * dt;
            if (is_output) {
                HistoryRow row;
                row.step = step;
                row.t = deformable.state().time;
                row.f_n = stats.f_normal;
                row.f_t1 = stats.f_t1;
                row.f_t2 = stats.f_t2;
                // safe: the rigid thread is parked in receive() between steps
                row.striker_pos = rigid.body().pos;
                row.striker_vel = rigid.body().vel;
                row.d_striker = norm(rigid.current_translation());
                row.ke = kinetic_energy(deformable.state().m, deformable.state().v);
                row.ie = deformable.discretization().recoverable_energy();
                row.de = deformable.discretization().dissipated_energy();
                row.w_ext = stats.w_external;
                row.w_con = stats.w_contact;
                row.ke_striker = 0.5 * rigid.body().mass * dot(rigid.body().vel,
                                                               rigid.body().vel);
                row.n_contact = stats.n_constrained;
                row.resets = stats.resets;
                row.released = stats.n_released;
                history.rows.push_back(row);
                history.worst_gap = std::min(history.worst_gap, deformable.worst_gap());
                if (on_output && !on_output(row, deformable)) break;
            }
        }
    } catch (...) {
        to_rigid.close();
        to_deformable.close();
        rigid_thread.join();
        throw;
    }

    to_rigid.close();
    to_deformable.close();
    rigid_thread.join();
    if (rigid_error) std::rethrow_exception(rigid_error);

    history.steps = step;
    history.ambiguous_projections = rigid.ambiguous_projections();
    if (!history.rows.empty()) {
        const auto& last = history.rows.back();
        history.energy_residual =
            std::abs(last.w_ext + last.w_con - (last.ke + last.ie + last.de));
    }
    return history;
}

} // namespace pdn
