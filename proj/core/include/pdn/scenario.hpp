#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdn/coupling.hpp"
#include "pdn/refine.hpp"

namespace pdn {

// ---------------------------------------------------------------------------
// Mesh generators
// ---------------------------------------------------------------------------

/// Tensor-product hexahedral box from per-axis coordinate arrays. Creates
/// node sets xmin..zmax and boundary sets (same names) on each face.
MeshModel make_box_mesh(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::vector<double>& zs, int material_id = 1);

/// Uniformly spaced coordinate axis [0, length] with n cells.
std::vector<double> axis_uniform(double length, int n);

/// Symmetric graded axis around 0: |x| <= fine_half at spacing fine_h, then
/// geometric growth out to total_half.
std::vector<double> axis_graded_symmetric(double fine_half, double fine_h, double total_half,
                                          double growth);

/// Graded axis [ -total, 0 ] with fine spacing fine_h near 0.
std::vector<double> axis_graded_top(double fine_len, double fine_h, double total, double growth);

/// One ply cluster of a laminate.
struct PlyCluster {
    double angle = 0.0;  // degrees
    int plies = 1;
};

/// Parses "45*4 0*4 -45*4 90*4" into clusters; with symmetric = true the
/// sequence is mirrored and a same-angle middle pair merged.
std::vector<PlyCluster> parse_layup(const std::string& text, bool symmetric);

/// Laminate plate: one HEX8 block per cluster (one element through the
/// cluster), zero-thickness ELINT8 layers between clusters, per-element ply
/// angle / frame / stacking fields, "top"/"bottom" boundary sets and
/// "support" (bottom nodes outside the cut-out) / "clamps" (top nodes inside
/// the corner discs) node sets.
struct PlateSpec {
    double length = 15.0, width = 10.0;  // mm
    double elem_xy = 0.36;
    double ply_thickness = 0.181;
    std::vector<PlyCluster> clusters;
    int bulk_material = 1;
    int interface_material = 101;
    double cutout_lx_frac = 125.0 / 150.0;  // frame window, scaled
    double cutout_wy_frac = 75.0 / 100.0;
    double clamp_radius_frac = 0.10;        // of min(length,width)
};
MeshModel make_plate_mesh(const PlateSpec& spec);

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

struct StrikerSpec {
    enum class Shape { Sphere, Cylinder, Plane };
    Shape shape = Shape::Sphere;
    double radius = 8.0;       // mm (sphere/cylinder)
    double width = 0.0;        // mm (cylinder axis length; plane edge)
    double facet = 0.2;        // target facet size near contact
    double mass = 0.0;         // tonne (free motion)
    Vec3 velocity;             // initial velocity (free motion)
    Vec3 gravity;
    std::array<bool, 3> fixed{true, true, false};  // free only along z by default
    bool free_motion = true;
    // prescribed translation: direction * depth * smooth_step(t, t0, tE)
    Vec3 direction{0, 0, -1};
    double depth = 0.0, t0 = 0.0, tE = 0.0;
    Vec3 tip_position;         // global position of the contact-side tip at t = 0
};

struct BcSpec {
    std::string mode;  // clamp | fix_x | fix_y | fix_z
    std::string nset;
};

struct Scenario {
    std::string name;
    MeshModel mesh;
    MaterialTable materials;
    std::vector<BcSpec> bcs;
    std::string contact_bset = "top";
    Vec3 gravity;
    StrikerSpec striker;
    TimeLoopConfig time;
    int ndivi = 0;
    bool fields_output = true;
};

/// Quasi-static indentation benchmark (cylindrical rigid head on a clamped
/// neo-Hookean beam, prescribed smooth-step indentation). scale = 1
/// reproduces the reference beam discretization (3510 elements).
Scenario build_indentation(double scale);

/// Drop-weight impact: laminate plate + rigid spherical striker with initial
/// velocity from the impact energy (corrected for the initial standoff fall).
struct ImpactOptions {
    std::string material = "AS4/8552";  // AS4/8552 | T800S/M21
    std::string layup = "45*4 0*4 -45*4 90*4";
    bool symmetric = true;
    double energy_J = 19.3;
    double striker_mass_kg = 5.0;
    double striker_radius = 8.0;  // mm
    double plate_length = 15.0, plate_width = 10.0;  // desk preset by default
    double elem_xy = 0.0;   // 0: derive from cluster thickness
    bool damage = true;
    bool gravity_on = true;
};
Scenario build_impact(const ImpactOptions& opt);

/// Parses the scenario config grammar (sections [mesh], [material:N],
/// [interface:N], [layup], [bc], [ic], [striker], [time], [output]).
Scenario load_scenario(const std::string& path);

// ---------------------------------------------------------------------------
// Run preparation
// ---------------------------------------------------------------------------

struct PreparedRun {
    std::shared_ptr<Discretization> discretization;
    std::unique_ptr<DeformableInstance> deformable;
    std::unique_ptr<RigidInstance> rigid;
    TimeLoopConfig time;
    std::vector<std::string> warnings;
    // one entry per refinement level: predicted == realized enforced on build
    std::vector<RefineDims> refine_levels;
    MeshModel refined_mesh;  // the mesh actually simulated
};

/// Applies refinement, validates crack-band lengths (SnapbackError), builds
/// both instances and collects config warnings (e.g. penalty stiffness below
/// 50 E_T / t_lam).
PreparedRun prepare_run(const Scenario& scenario, ThreadPool& pool, int ndivi_override = -1);

} // namespace pdn
