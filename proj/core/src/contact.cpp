#include "pdn/contact.hpp"

#include <cmath>

namespace pdn {

namespace {

void make_frame(const Vec3& n, Vec3& t1, Vec3& t2) {
    // tangent seeded from the global axis least aligned with n
    const double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
    Vec3 seed{1, 0, 0};
    if (ay <= ax && ay <= az) seed = Vec3{0, 1, 0};
    else if (az <= ax && az <= ay) seed = Vec3{0, 0, 1};
    t1 = normalized(seed - dot(seed, n) * n);
    t2 = cross(n, t1);
}

}  // namespace

Projection MasterSurface::project(const Vec3& global_point, Index node_id,
                                  bool* ambiguous) const {
    const FacetBvh::Hit hit = bvh_.closest(global_point - translation_);
    if (ambiguous) *ambiguous = hit.ambiguous;
    Projection p;
    p.node = node_id;
    p.master_facet = hit.tri;
    p.point = hit.point + translation_;
    p.gap = hit.signed_gap;
    p.n = hit.normal;
    make_frame(p.n, p.t1, p.t2);
    return p;
}

std::vector<Projection> MasterSurface::detect(const std::vector<Vec3>& positions,
                                              const std::vector<Index>& node_ids,
                                              long long* ambiguous_count) const {
    std::vector<Projection> out;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const FacetBvh::Hit hit = bvh_.closest(positions[i] - translation_);
        if (hit.tri < 0) continue;
        if (ambiguous_count && hit.ambiguous) ++*ambiguous_count;
        if (hit.signed_gap < 0.0) {
            Projection p;
            p.node = node_ids[i];
            p.master_facet = hit.tri;
            p.point = hit.point + translation_;
            p.gap = hit.signed_gap;
            p.n = hit.normal;
            make_frame(p.n, p.t1, p.t2);
            out.push_back(p);
        }
    }
    return out;
}

Vec3 constrained_position(const Vec3& tentative_position, const Projection& proj) {
    const double off = dot(tentative_position - proj.point, proj.n);
    return tentative_position - off * proj.n;
}

ReleaseOutcome release_nodes(const std::vector<Index>& nodes,
                             const std::vector<Vec3>& reactions,
                             const std::vector<Vec3>& normals) {
    ReleaseOutcome out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (dot(reactions[i], normals[i]) < 0.0) out.released.push_back(nodes[i]);
    out.reset = !out.released.empty();
    return out;
}

// ---------------------------------------------------------------------------
// Rigid surface primitives
// ---------------------------------------------------------------------------

TriSurface make_spherical_cap(double radius, double cap_angle, double target_h) {
    // polar grid around the -z pole; outward normals point away from center
    TriSurface s;
    const int n_theta = std::max(3, static_cast<int>(std::ceil(radius * cap_angle / target_h)));
    const double dtheta = cap_angle / n_theta;

    auto pt = [&](double theta, double phi) {
        return Vec3{radius * std::sin(theta) * std::cos(phi),
                    radius * std::sin(theta) * std::sin(phi), -radius * std::cos(theta)};
    };

    int facet = 0;
    // pole fan
    {
        const double theta = dtheta;
        const int n_phi = std::max(6, static_cast<int>(
                                           std::ceil(2 * M_PI * radius * std::sin(theta) /
                                                     target_h)));
        const double dphi = 2 * M_PI / n_phi;
        const Vec3 pole{0, 0, -radius};
        for (int j = 0; j < n_phi; ++j)
            s.add_tri(pole, pt(theta, (j + 1) * dphi), pt(theta, j * dphi), facet++);
    }
    for (int i = 1; i < n_theta; ++i) {
        const double th0 = i * dtheta, th1 = (i + 1) * dtheta;
        const int n_phi = std::max(6, static_cast<int>(std::ceil(
                                           2 * M_PI * radius * std::sin(th1) / target_h)));
        const double dphi = 2 * M_PI / n_phi;
        for (int j = 0; j < n_phi; ++j) {
            const double p0 = j * dphi, p1 = (j + 1) * dphi;
            // wound so normals point radially outward (away from center)
            s.add_quad(pt(th0, p0), pt(th0, p1), pt(th1, p1), pt(th1, p0), facet++);
        }
    }
    return s;
}

TriSurface make_plane_patch(double lx, double ly, int nx, int ny) {
    TriSurface s;
    int facet = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            const double x0 = -0.5 * lx + lx * i / nx, x1 = -0.5 * lx + lx * (i + 1) / nx;
            const double y0 = -0.5 * ly + ly * j / ny, y1 = -0.5 * ly + ly * (j + 1) / ny;
            s.add_quad(Vec3{x0, y0, 0}, Vec3{x1, y0, 0}, Vec3{x1, y1, 0}, Vec3{x0, y1, 0},
                       facet++);
        }
    return s;
}

TriSurface make_cylinder_patch(double radius, double width, double arc_angle, double target_h) {
    // axis along z through the origin; lowest line at y = -radius
    TriSurface s;
    const int n_arc = std::max(4, static_cast<int>(std::ceil(radius * arc_angle / target_h)));
    const int n_z = std::max(2, static_cast<int>(std::ceil(width / target_h)));
    const double da = arc_angle / n_arc;
    int facet = 0;
    auto pt = [&](double a, double z) {
        return Vec3{radius * std::sin(a), -radius * std::cos(a), z};
    };
    for (int i = 0; i < n_arc; ++i) {
        const double a0 = -0.5 * arc_angle + i * da, a1 = a0 + da;
        for (int j = 0; j < n_z; ++j) {
            const double z0 = -0.5 * width + width * j / n_z;
            const double z1 = -0.5 * width + width * (j + 1) / n_z;
            s.add_quad(pt(a0, z0), pt(a1, z0), pt(a1, z1), pt(a0, z1), facet++);
        }
    }
    return s;
}

} // namespace pdn
