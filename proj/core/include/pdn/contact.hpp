#pragma once

#include <cstdint>
#include <vector>

#include "pdn/bvh.hpp"
#include "pdn/common.hpp"

namespace pdn {

/// Closest-point projection of one slave node onto the master surface.
struct Projection {
    Index node = -1;     // slave surface node (global node id)
    int master_facet = -1;
    Vec3 point;          // projected point on the master, global frame
    double gap = 0.0;    // signed distance, negative = penetration
    Vec3 n, t1, t2;      // local frame; n is the master outward normal
};

enum class ContactStatus : std::uint8_t { Free = 0, Constrained = 1, ReleasedThisStep = 2 };

/// Rigid master surface: a triangulated body-local surface plus a rigid
/// translation. The BVH is built once; motion is a query-time transform.
class MasterSurface {
public:
    explicit MasterSurface(TriSurface surface) : bvh_(std::move(surface)) {}

    void set_translation(const Vec3& t) { translation_ = t; }
    const Vec3& translation() const { return translation_; }

    /// Projection of a global-frame point; gap sign per master outward normal.
    /// `ambiguous` (optional) is set when the point is equidistant to facets
    /// with opposing normals; the lowest facet id wins.
    Projection project(const Vec3& global_point, Index node_id,
                       bool* ambiguous = nullptr) const;

    /// Penetrating nodes only (gap < 0), the operation the detection phase
    /// applies to unconstrained candidates.
    std::vector<Projection> detect(const std::vector<Vec3>& positions,
                                   const std::vector<Index>& node_ids,
                                   long long* ambiguous_count = nullptr) const;

    const FacetBvh& bvh() const { return bvh_; }

private:
    FacetBvh bvh_;
    Vec3 translation_;
};

/// Position after enforcing the Dirichlet condition: the update is rotated
/// into the projection frame, the normal component replaced so the node sits
/// on the master tangent plane, tangential motion untouched.
Vec3 constrained_position(const Vec3& tentative_position, const Projection& proj);

/// Release decision per Eq.-(2)-style check: nodes whose reaction has a
/// negative normal component are adhesion nodes and must be released.
struct ReleaseOutcome {
    std::vector<Index> released;
    bool reset = false;
};
ReleaseOutcome release_nodes(const std::vector<Index>& nodes,
                             const std::vector<Vec3>& reactions,
                             const std::vector<Vec3>& normals);

/// Spherical-cap triangulation (axis +z, cap around the lowest point -z side
/// when angle_extent < pi/2), used for striker surfaces. Facet edge length
/// approximately `target_h` inside the cap.
TriSurface make_spherical_cap(double radius, double cap_angle, double target_h);

/// Rectangle in the x-y plane at z = 0 with outward normal +z.
TriSurface make_plane_patch(double lx, double ly, int nx, int ny);

/// Cylindrical segment (axis along z, radius r, width w), lower half surface,
/// outward normals away from the axis.
TriSurface make_cylinder_patch(double radius, double width, double arc_angle, double target_h);

} // namespace pdn
