#include "pdn/fem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace pdn {

void KinematicState::resize(Index nodes) {
    const std::size_t n = static_cast<std::size_t>(nodes) * 3;
    d.assign(n, 0.0);
    v.assign(n, 0.0);
    a.assign(n, 0.0);
    m.assign(n, 0.0);
    f_int.assign(n, 0.0);
    f_ext.assign(n, 0.0);
    f_con.assign(n, 0.0);
}

void hex8_shape_derivatives(double xi, double eta, double zeta, double dN[8][3]) {
    static const double sx[8] = {-1, 1, 1, -1, -1, 1, 1, -1};
    static const double sy[8] = {-1, -1, 1, 1, -1, -1, 1, 1};
    static const double sz[8] = {-1, -1, -1, -1, 1, 1, 1, 1};
    for (int a = 0; a < 8; ++a) {
        dN[a][0] = 0.125 * sx[a] * (1 + sy[a] * eta) * (1 + sz[a] * zeta);
        dN[a][1] = 0.125 * sy[a] * (1 + sx[a] * xi) * (1 + sz[a] * zeta);
        dN[a][2] = 0.125 * sz[a] * (1 + sx[a] * xi) * (1 + sy[a] * eta);
    }
}

namespace {

constexpr double kGaussPt = 0.5773502691896257;

Mat3 material_rotation(const MaterialFrame& fr, double ply_angle_deg) {
    const double c = std::cos(ply_angle_deg * M_PI / 180.0);
    const double s = std::sin(ply_angle_deg * M_PI / 180.0);
    const Vec3 a1 = c * fr.a1 + s * fr.a2;
    const Vec3 a2 = -s * fr.a1 + c * fr.a2;
    Mat3 Q;
    for (int j = 0; j < 3; ++j) {
        Q(0, j) = a1[j];
        Q(1, j) = a2[j];
        Q(2, j) = fr.a3[j];
    }
    return Q;
}

Voigt tensor_to_voigt_strain(const Mat3& E) {
    return {E(0, 0), E(1, 1), E(2, 2), 2.0 * E(1, 2), 2.0 * E(0, 2), 2.0 * E(0, 1)};
}

Mat3 voigt_to_tensor_stress(const Voigt& s) {
    Mat3 S;
    S(0, 0) = s[0]; S(1, 1) = s[1]; S(2, 2) = s[2];
    S(1, 2) = S(2, 1) = s[3];
    S(0, 2) = S(2, 0) = s[4];
    S(0, 1) = S(1, 0) = s[5];
    return S;
}

}  // namespace

Discretization::Discretization(MeshModel mesh, MaterialTable materials, ThreadPool& pool)
    : mesh_(std::move(mesh)), materials_(std::move(materials)), pool_(pool) {
    Index gid = 0;
    Index n_intra_pts = 0, n_coh_pts = 0;
    for (const auto& blk : mesh_.blocks) {
        if (is_bulk(blk.kind)) {
            const auto it = materials_.bulk.find(blk.material_id);
            if (it == materials_.bulk.end())
                throw MaterialError("no bulk material bound to id " +
                                    std::to_string(blk.material_id));
            for (Index e = 0; e < blk.size(); ++e) {
                BulkElem el;
                el.global_id = gid + e;
                el.n_nodes = node_count(blk.kind);
                el.mat = &it->second;
                el.rho = it->second.density();
                const Index* c = blk.nodes_of(e);
                for (int a = 0; a < el.n_nodes; ++a) el.conn[a] = c[a];
                el.Q = material_rotation(mesh_.frame_of(el.global_id),
                                         mesh_.ply_angle_of(el.global_id));
                const double vol = element_volume(mesh_, el.global_id);
                el.lc = std::cbrt(vol);

                if (blk.kind == ElementKind::HEX8) {
                    el.n_ip = 8;
                    int ip = 0;
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j)
                            for (int k = 0; k < 2; ++k, ++ip) {
                                double dN[8][3];
                                hex8_shape_derivatives(i ? kGaussPt : -kGaussPt,
                                                       j ? kGaussPt : -kGaussPt,
                                                       k ? kGaussPt : -kGaussPt, dN);
                                Mat3 J;
                                for (int a = 0; a < 8; ++a)
                                    for (int r = 0; r < 3; ++r)
                                        for (int s = 0; s < 3; ++s)
                                            J(r, s) += mesh_.nodes[el.conn[a]][r] * dN[a][s];
                                const Mat3 Jinv = inverse(J);
                                for (int a = 0; a < 8; ++a) {
                                    Vec3 g;
                                    for (int r = 0; r < 3; ++r)
                                        g[r] = Jinv(0, r) * dN[a][0] + Jinv(1, r) * dN[a][1] +
                                               Jinv(2, r) * dN[a][2];
                                    el.dNdX[ip][a] = g;
                                }
                                el.weight[ip] = det(J);
                            }
                } else {  // TET4, constant gradient, 1 point
                    el.n_ip = 1;
                    const Vec3 x0 = mesh_.nodes[el.conn[0]];
                    Mat3 D;
                    for (int c2 = 1; c2 < 4; ++c2) {
                        const Vec3 dd = mesh_.nodes[el.conn[c2]] - x0;
                        for (int r = 0; r < 3; ++r) D(r, c2 - 1) = dd[r];
                    }
                    const Mat3 Dinv = inverse(D);
                    // dN_c/dX = row (c-1) of Dinv; dN_0/dX = -sum
                    Vec3 sum{};
                    for (int c2 = 1; c2 < 4; ++c2) {
                        Vec3 g{Dinv(c2 - 1, 0), Dinv(c2 - 1, 1), Dinv(c2 - 1, 2)};
                        el.dNdX[0][c2] = g;
                        sum += g;
                    }
                    el.dNdX[0][0] = -sum;
                    el.weight[0] = det(D) / 6.0;
                }

                if (it->second.model == BulkMaterial::Model::Damage) {
                    el.damage = std::make_unique<IntralaminarMaterial>(it->second.ti, el.lc);
                    el.state_offset = n_intra_pts;
                    n_intra_pts += el.n_ip;
                }
                bulk_.push_back(std::move(el));
            }
        } else if (blk.kind == ElementKind::ELINT8) {
            const auto it = materials_.interface.find(blk.material_id);
            if (it == materials_.interface.end())
                throw MaterialError("no cohesive material bound to id " +
                                    std::to_string(blk.material_id));
            for (Index e = 0; e < blk.size(); ++e) {
                CohElem el;
                el.global_id = gid + e;
                const Index* c = blk.nodes_of(e);
                std::array<Vec3, 8> x;
                for (int a = 0; a < 8; ++a) {
                    el.conn[a] = c[a];
                    x[a] = mesh_.nodes[c[a]];
                }
                const auto st = mesh_.stacking.find(el.global_id);
                const Vec3 stacking = st != mesh_.stacking.end() ? st->second : Vec3{0, 0, 1};
                el.kin = elint_kinematics(x, stacking);
                el.props = &it->second;
                el.state_offset = n_coh_pts;
                n_coh_pts += 4;
                coh_.push_back(std::move(el));
            }
        }
        gid += blk.size();
    }

    states_.intra.assign(n_intra_pts, IntraPointState{});
    states_.ip_work.assign(n_intra_pts, 0.0);
    states_.ip_strain.assign(n_intra_pts, Voigt{});
    states_.ip_stress.assign(n_intra_pts, Voigt{});
    states_.coh.assign(n_coh_pts, CohesivePointState{});
    states_.coh_jump.assign(n_coh_pts, Vec3{});
    states_.coh_traction.assign(n_coh_pts, Vec3{});
    states_.coh_work.assign(n_coh_pts, 0.0);

    const std::size_t n_slots = bulk_.size() + coh_.size();
    elem_force_.assign(n_slots * 24, 0.0);
    states_.elem_recoverable.assign(n_slots, 0.0);
    states_.elem_dissipated.assign(n_slots, 0.0);

    // node gather lists ordered by element id so per-node summation order is
    // independent of the worker partition
    std::vector<std::vector<std::pair<Index, int>>> per_node(mesh_.node_count_total());
    for (std::size_t s = 0; s < bulk_.size(); ++s)
        for (int a = 0; a < bulk_[s].n_nodes; ++a)
            per_node[bulk_[s].conn[a]].push_back({static_cast<Index>(s), a});
    for (std::size_t s = 0; s < coh_.size(); ++s)
        for (int a = 0; a < 8; ++a)
            per_node[coh_[s].conn[a]].push_back(
                {static_cast<Index>(bulk_.size() + s), a});
    incidence_begin_.assign(mesh_.node_count_total() + 1, 0);
    for (Index n = 0; n < mesh_.node_count_total(); ++n) {
        auto& v = per_node[n];
        std::sort(v.begin(), v.end());
        incidence_begin_[n + 1] = incidence_begin_[n] + static_cast<Index>(v.size());
    }
    incidence_.resize(incidence_begin_.back());
    for (Index n = 0; n < mesh_.node_count_total(); ++n)
        std::copy(per_node[n].begin(), per_node[n].end(),
                  incidence_.begin() + incidence_begin_[n]);
}

bool Discretization::has_damage() const { return !states_.intra.empty(); }

std::vector<double> Discretization::lumped_mass() const {
    std::vector<double> m(mesh_.node_count_total() * 3, 0.0);
    for (const auto& el : bulk_) {
        double vol = 0.0;
        for (int ip = 0; ip < el.n_ip; ++ip) vol += el.weight[ip];
        const double share = el.rho * vol / el.n_nodes;
        for (int a = 0; a < el.n_nodes; ++a)
            for (int i = 0; i < 3; ++i) m[el.conn[a] * 3 + i] += share;
    }
    return m;
}

double Discretization::critical_time_step() const {
    double dt = std::numeric_limits<double>::infinity();
    for (const auto& el : bulk_) {
        double bound;
        if (el.mat->model == BulkMaterial::Model::NeoHookean) {
            const double E = el.mat->nh.E, nu = el.mat->nh.nu;
            const double lam = E * nu / ((1 + nu) * (1 - 2 * nu));
            const double mu = E / (2 * (1 + nu));
            bound = lam + 2 * mu + 2 * std::abs(lam);
        } else {
            bound = wavespeed_stiffness_bound(effective_stiffness(el.mat->ti));
        }
        dt = std::min(dt, el.lc * std::sqrt(el.rho / bound));
    }
    for (const auto& [id, p] : materials_.interface)
        if (!coh_.empty() && p.rho_bar > 0.0) dt = std::min(dt, cohesive_time_step(p));
    return dt;
}

void Discretization::assemble_element(std::size_t idx, const std::vector<double>& d) {
    double* out = elem_force_.data() + idx * 24;
    std::fill(out, out + 24, 0.0);

    if (idx < bulk_.size()) {
        const BulkElem& el = bulk_[idx];
        Vec3 disp[8];
        for (int a = 0; a < el.n_nodes; ++a)
            disp[a] = Vec3{d[el.conn[a] * 3], d[el.conn[a] * 3 + 1], d[el.conn[a] * 3 + 2]};

        double recov = 0.0, dissip = 0.0;
        for (int ip = 0; ip < el.n_ip; ++ip) {
            Mat3 F = Mat3::identity();
            for (int a = 0; a < el.n_nodes; ++a)
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) F(i, j) += disp[a][i] * el.dNdX[ip][a][j];

            Mat3 S;
            if (el.mat->model == BulkMaterial::Model::NeoHookean) {
                try {
                    S = neo_hookean_stress(F, el.mat->nh);
                } catch (const InvertedElementError& e) {
                    throw MaterialError(std::string(e.what()) + " in element " +
                                        std::to_string(el.global_id + 1));
                }
                recov += neo_hookean_energy(F, el.mat->nh) * el.weight[ip];
            } else {
                // Green strain rotated to the material frame
                Mat3 E;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double c = 0.0;
                        for (int k = 0; k < 3; ++k) c += F(k, i) * F(k, j);
                        E(i, j) = 0.5 * (c - (i == j ? 1.0 : 0.0));
                    }
                const Mat3 Em = el.Q * E * transpose(el.Q);
                const Voigt eps = tensor_to_voigt_strain(Em);

                Voigt sig;
                if (el.mat->model == BulkMaterial::Model::Damage) {
                    const Index sp = el.state_offset + ip;
                    IntraPointState& st = states_.intra[sp];
                    sig = el.damage->update(eps, st);

                    // trapezoid stress work and current recoverable part
                    const Voigt& e_old = states_.ip_strain[sp];
                    const Voigt& s_old = states_.ip_stress[sp];
                    double dw = 0.0, psi = 0.0;
                    Voigt ee = eps;
                    ee[5] -= st.gamma_p;
                    for (int c2 = 0; c2 < 6; ++c2) {
                        dw += 0.5 * (s_old[c2] + sig[c2]) * (eps[c2] - e_old[c2]);
                        psi += 0.5 * sig[c2] * ee[c2];
                    }
                    states_.ip_work[sp] += dw * el.weight[ip];
                    states_.ip_strain[sp] = eps;
                    states_.ip_stress[sp] = sig;
                    recov += psi * el.weight[ip];
                    dissip += std::max(0.0, states_.ip_work[sp] - psi * el.weight[ip]);
                } else {
                    sig = effective_stiffness(el.mat->ti) * eps;
                    double psi = 0.0;
                    for (int c2 = 0; c2 < 6; ++c2) psi += 0.5 * sig[c2] * eps[c2];
                    recov += psi * el.weight[ip];
                }

                const Mat3 Sm = voigt_to_tensor_stress(sig);
                S = transpose(el.Q) * Sm * el.Q;
            }

            const Mat3 P = F * S;
            for (int a = 0; a < el.n_nodes; ++a) {
                const Vec3 g = el.dNdX[ip][a];
                for (int i = 0; i < 3; ++i)
                    out[a * 3 + i] +=
                        (P(i, 0) * g.x + P(i, 1) * g.y + P(i, 2) * g.z) * el.weight[ip];
            }
        }
        states_.elem_recoverable[idx] = recov;
        if (el.mat->model == BulkMaterial::Model::Damage) states_.elem_dissipated[idx] = dissip;
    } else {
        const CohElem& el = coh_[idx - bulk_.size()];
        std::array<Vec3, 8> disp;
        for (int a = 0; a < 8; ++a)
            disp[a] = Vec3{d[el.conn[a] * 3], d[el.conn[a] * 3 + 1], d[el.conn[a] * 3 + 2]};
        const auto jumps = elint_jumps(el.kin, disp);

        double recov = 0.0, dissip = 0.0;
        const Mat3 Rt = transpose(el.kin.R);
        for (int i = 0; i < 4; ++i) {
            const Index sp = el.state_offset + i;
            CohesivePointState& st = states_.coh[sp];
            const Vec3 t_loc = cohesive_update(jumps[i], st, *el.props);

            const Vec3& j_old = states_.coh_jump[sp];
            const Vec3& t_old = states_.coh_traction[sp];
            const double w = el.kin.w[i];
            states_.coh_work[sp] += 0.5 * dot(t_old + t_loc, jumps[i] - j_old) * w;
            states_.coh_jump[sp] = jumps[i];
            states_.coh_traction[sp] = t_loc;

            const double psi = cohesive_recoverable(jumps[i], st, *el.props) * w;
            recov += psi;
            dissip += std::max(0.0, states_.coh_work[sp] - psi);

            const Vec3 t_glob = Rt * t_loc;
            for (int c2 = 0; c2 < 3; ++c2) {
                out[(4 + i) * 3 + c2] += w * t_glob[c2];
                out[i * 3 + c2] -= w * t_glob[c2];
            }
        }
        states_.elem_recoverable[idx] = recov;
        states_.elem_dissipated[idx] = dissip;
    }
}

void Discretization::assemble_internal(const std::vector<double>& d,
                                       std::vector<double>& f_int) {
    const auto t_start = std::chrono::steady_clock::now();
    const std::size_t n_slots = bulk_.size() + coh_.size();
    pool_.parallel_for(0, n_slots, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t idx = b; idx < e; ++idx) assemble_element(idx, d);
    });

    f_int.assign(mesh_.node_count_total() * 3, 0.0);
    pool_.parallel_for(
        0, static_cast<std::size_t>(mesh_.node_count_total()),
        [&](std::size_t b, std::size_t e, std::size_t) {
            for (std::size_t n = b; n < e; ++n) {
                double fx = 0, fy = 0, fz = 0;
                for (Index k = incidence_begin_[n]; k < incidence_begin_[n + 1]; ++k) {
                    const auto [slot, local] = incidence_[k];
                    const double* ef = elem_force_.data() + slot * 24 + local * 3;
                    fx += ef[0];
                    fy += ef[1];
                    fz += ef[2];
                }
                f_int[n * 3] = fx;
                f_int[n * 3 + 1] = fy;
                f_int[n * 3 + 2] = fz;
            }
        });
    assembly_seconds_ +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
}

double Discretization::recoverable_energy() const {
    double s = 0.0;
    for (double v : states_.elem_recoverable) s += v;
    return s;
}

double Discretization::dissipated_energy() const {
    double s = 0.0;
    for (double v : states_.elem_dissipated) s += v;
    return s;
}

std::vector<double> Discretization::field_d1() const {
    std::vector<double> out(mesh_.element_count(), 0.0);
    for (const auto& el : bulk_)
        if (el.damage) {
            double v = 0.0;
            for (int ip = 0; ip < el.n_ip; ++ip)
                v = std::max(v, states_.intra[el.state_offset + ip].d1());
            out[el.global_id] = v;
        }
    return out;
}

std::vector<double> Discretization::field_d2() const {
    std::vector<double> out(mesh_.element_count(), 0.0);
    for (const auto& el : bulk_)
        if (el.damage) {
            double v = 0.0;
            for (int ip = 0; ip < el.n_ip; ++ip)
                v = std::max(v, states_.intra[el.state_offset + ip].d2());
            out[el.global_id] = v;
        }
    return out;
}

std::vector<double> Discretization::field_cohesive_damage() const {
    std::vector<double> out(mesh_.element_count(), 0.0);
    for (const auto& el : coh_) {
        double v = 0.0;
        for (int i = 0; i < 4; ++i) v = std::max(v, states_.coh[el.state_offset + i].D);
        out[el.global_id] = v;
    }
    return out;
}

double Discretization::max_cohesive_damage() const {
    double v = 0.0;
    for (const auto& st : states_.coh) v = std::max(v, st.D);
    return v;
}

} // namespace pdn
