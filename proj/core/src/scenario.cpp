#include "pdn/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pdn {

// ---------------------------------------------------------------------------
// Axes and box meshes
// ---------------------------------------------------------------------------

std::vector<double> axis_uniform(double length, int n) {
    std::vector<double> xs(n + 1);
    for (int i = 0; i <= n; ++i) xs[i] = length * i / n;
    return xs;
}

std::vector<double> axis_graded_symmetric(double fine_half, double fine_h, double total_half,
                                          double growth) {
    std::vector<double> right;
    double x = 0.0;
    while (x < fine_half - 1e-12) {
        x = std::min(x + fine_h, fine_half);
        right.push_back(x);
    }
    double h = fine_h;
    while (x < total_half - 1e-12) {
        h *= growth;
        x = std::min(x + h, total_half);
        right.push_back(x);
    }
    std::vector<double> xs;
    for (auto it = right.rbegin(); it != right.rend(); ++it) xs.push_back(-*it);
    xs.push_back(0.0);
    xs.insert(xs.end(), right.begin(), right.end());
    return xs;
}

std::vector<double> axis_graded_top(double fine_len, double fine_h, double total,
                                    double growth) {
    // z from -total to 0, fine near z = 0
    std::vector<double> depth;
    double x = 0.0;
    while (x < fine_len - 1e-12) {
        x = std::min(x + fine_h, fine_len);
        depth.push_back(x);
    }
    double h = fine_h;
    while (x < total - 1e-12) {
        h *= growth;
        x = std::min(x + h, total);
        depth.push_back(x);
    }
    std::vector<double> xs;
    for (auto it = depth.rbegin(); it != depth.rend(); ++it) xs.push_back(-*it);
    xs.push_back(0.0);
    return xs;
}

MeshModel make_box_mesh(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::vector<double>& zs, int material_id) {
    const int nx = static_cast<int>(xs.size()) - 1;
    const int ny = static_cast<int>(ys.size()) - 1;
    const int nz = static_cast<int>(zs.size()) - 1;
    MeshModel m;
    m.nodes.reserve((nx + 1) * (ny + 1) * (nz + 1));
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) m.nodes.push_back(Vec3{xs[i], ys[j], zs[k]});

    auto nid = [&](int i, int j, int k) -> Index {
        return (static_cast<Index>(k) * (ny + 1) + j) * (nx + 1) + i;
    };

    ElementBlock blk;
    blk.kind = ElementKind::HEX8;
    blk.material_id = material_id;
    blk.connectivity.reserve(static_cast<std::size_t>(nx) * ny * nz * 8);
    auto eid = [&](int i, int j, int k) -> Index {
        return (static_cast<Index>(k) * ny + j) * nx + i;
    };
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const Index c[8] = {nid(i, j, k),         nid(i + 1, j, k),
                                    nid(i + 1, j + 1, k), nid(i, j + 1, k),
                                    nid(i, j, k + 1),     nid(i + 1, j, k + 1),
                                    nid(i + 1, j + 1, k + 1), nid(i, j + 1, k + 1)};
                blk.connectivity.insert(blk.connectivity.end(), c, c + 8);
            }
    m.blocks.push_back(std::move(blk));

    // face node sets and boundary sets; hex local faces: 0 z-, 1 z+, 2 y-,
    // 3 x+, 4 y+, 5 x-
    const char* names[6] = {"zmin", "zmax", "ymin", "xmax", "ymax", "xmin"};
    for (int f = 0; f < 6; ++f) m.bsets.push_back(BoundarySet{names[f], {}});
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                if (k == 0) m.bsets[0].facets.push_back({eid(i, j, k), 0});
                if (k == nz - 1) m.bsets[1].facets.push_back({eid(i, j, k), 1});
                if (j == 0) m.bsets[2].facets.push_back({eid(i, j, k), 2});
                if (i == nx - 1) m.bsets[3].facets.push_back({eid(i, j, k), 3});
                if (j == ny - 1) m.bsets[4].facets.push_back({eid(i, j, k), 4});
                if (i == 0) m.bsets[5].facets.push_back({eid(i, j, k), 5});
            }
    auto add_nset = [&](const std::string& name, auto pred) {
        NodeSet s;
        s.name = name;
        for (int k = 0; k <= nz; ++k)
            for (int j = 0; j <= ny; ++j)
                for (int i = 0; i <= nx; ++i)
                    if (pred(i, j, k)) s.nodes.push_back(nid(i, j, k));
        m.nsets.push_back(std::move(s));
    };
    add_nset("xmin", [&](int i, int, int) { return i == 0; });
    add_nset("xmax", [&](int i, int, int) { return i == nx; });
    add_nset("ymin", [&](int, int j, int) { return j == 0; });
    add_nset("ymax", [&](int, int j, int) { return j == ny; });
    add_nset("zmin", [&](int, int, int k) { return k == 0; });
    add_nset("zmax", [&](int, int, int k) { return k == nz; });
    return m;
}

// ---------------------------------------------------------------------------
// Layup and plate
// ---------------------------------------------------------------------------

std::vector<PlyCluster> parse_layup(const std::string& text, bool symmetric) {
    std::vector<PlyCluster> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        PlyCluster c;
        const auto star = tok.find('*');
        try {
            if (star == std::string::npos) {
                c.angle = std::stod(tok);
                c.plies = 1;
            } else {
                c.angle = std::stod(tok.substr(0, star));
                c.plies = std::stoi(tok.substr(star + 1));
            }
        } catch (const std::exception&) {
            throw ConfigError("cannot parse layup entry '" + tok + "'");
        }
        if (c.plies < 1) throw ConfigError("layup cluster must have >= 1 plies");
        out.push_back(c);
    }
    if (out.empty()) throw ConfigError("empty layup");
    if (symmetric) {
        std::vector<PlyCluster> mirrored(out.rbegin(), out.rend());
        out.insert(out.end(), mirrored.begin(), mirrored.end());
    }
    // merge adjacent same-angle clusters so every interface is an angle change
    std::vector<PlyCluster> merged;
    for (const auto& c : out) {
        if (!merged.empty() && merged.back().angle == c.angle)
            merged.back().plies += c.plies;
        else
            merged.push_back(c);
    }
    return merged;
}

MeshModel make_plate_mesh(const PlateSpec& spec) {
    const int nx = std::max(1, static_cast<int>(std::lround(spec.length / spec.elem_xy)));
    const int ny = std::max(1, static_cast<int>(std::lround(spec.width / spec.elem_xy)));
    const int K = static_cast<int>(spec.clusters.size());
    if (K < 1) throw ConfigError("plate needs at least one ply cluster");

    const int sheet_size = (nx + 1) * (ny + 1);
    // two node sheets per cluster (bottom, top); sheet T_c coincides with
    // B_{c+1} across the zero-thickness interface
    MeshModel m;
    m.nodes.reserve(static_cast<std::size_t>(sheet_size) * 2 * K);
    std::vector<double> zb(K + 1);
    zb[0] = 0.0;
    for (int c = 0; c < K; ++c)
        zb[c + 1] = zb[c] + spec.clusters[c].plies * spec.ply_thickness;

    auto sheet_base = [&](int c, bool top) -> Index {
        return static_cast<Index>((2 * c + (top ? 1 : 0))) * sheet_size;
    };
    for (int c = 0; c < K; ++c)
        for (int t = 0; t < 2; ++t) {
            const double z = t ? zb[c + 1] : zb[c];
            for (int j = 0; j <= ny; ++j)
                for (int i = 0; i <= nx; ++i)
                    m.nodes.push_back(
                        Vec3{spec.length * i / nx, spec.width * j / ny, z});
        }

    auto nid = [&](int c, bool top, int i, int j) -> Index {
        return sheet_base(c, top) + static_cast<Index>(j) * (nx + 1) + i;
    };

    Index gid = 0;
    for (int c = 0; c < K; ++c) {
        ElementBlock blk;
        blk.kind = ElementKind::HEX8;
        blk.material_id = spec.bulk_material;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const Index cc[8] = {nid(c, false, i, j),     nid(c, false, i + 1, j),
                                     nid(c, false, i + 1, j + 1), nid(c, false, i, j + 1),
                                     nid(c, true, i, j),      nid(c, true, i + 1, j),
                                     nid(c, true, i + 1, j + 1),  nid(c, true, i, j + 1)};
                blk.connectivity.insert(blk.connectivity.end(), cc, cc + 8);
                m.ply_angles[gid] = spec.clusters[c].angle;
                ++gid;
            }
        m.blocks.push_back(std::move(blk));
    }
    if (K > 1) {
        ElementBlock blk;
        blk.kind = ElementKind::ELINT8;
        blk.material_id = spec.interface_material;
        for (int c = 0; c + 1 < K; ++c)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const Index cc[8] = {nid(c, true, i, j),      nid(c, true, i + 1, j),
                                         nid(c, true, i + 1, j + 1),  nid(c, true, i, j + 1),
                                         nid(c + 1, false, i, j), nid(c + 1, false, i + 1, j),
                                         nid(c + 1, false, i + 1, j + 1),
                                         nid(c + 1, false, i, j + 1)};
                    blk.connectivity.insert(blk.connectivity.end(), cc, cc + 8);
                    m.stacking[gid] = Vec3{0, 0, 1};
                    ++gid;
                }
        m.blocks.push_back(std::move(blk));
    }

    // boundaries: element ids are block-ordered, bulk clusters first
    const Index per_cluster = static_cast<Index>(nx) * ny;
    BoundarySet top{"top", {}}, bottom{"bottom", {}};
    for (Index e = 0; e < per_cluster; ++e) {
        bottom.facets.push_back({e, 0});
        top.facets.push_back({per_cluster * (K - 1) + e, 1});
    }
    m.bsets.push_back(std::move(bottom));
    m.bsets.push_back(std::move(top));

    // support ring (bottom sheet outside the frame cut-out) and clamp discs
    // (top sheet near the cut-out corners)
    const double cx0 = 0.5 * spec.length * (1.0 - spec.cutout_lx_frac);
    const double cx1 = spec.length - cx0;
    const double cy0 = 0.5 * spec.width * (1.0 - spec.cutout_wy_frac);
    const double cy1 = spec.width - cy0;
    const double rc = spec.clamp_radius_frac * std::min(spec.length, spec.width);
    NodeSet support{"support", {}}, clamps{"clamps", {}};
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const double x = spec.length * i / nx, y = spec.width * j / ny;
            if (x < cx0 - 1e-12 || x > cx1 + 1e-12 || y < cy0 - 1e-12 || y > cy1 + 1e-12)
                support.nodes.push_back(nid(0, false, i, j));
            for (const auto& [px, py] : {std::pair{cx0, cy0}, std::pair{cx1, cy0},
                                         std::pair{cx0, cy1}, std::pair{cx1, cy1}}) {
                const double dx = x - px, dy = y - py;
                if (dx * dx + dy * dy <= rc * rc) {
                    clamps.nodes.push_back(nid(K - 1, true, i, j));
                    break;
                }
            }
        }
    m.nsets.push_back(std::move(support));
    m.nsets.push_back(std::move(clamps));
    return m;
}

// ---------------------------------------------------------------------------
// Built-in benchmark scenarios
// ---------------------------------------------------------------------------

Scenario build_indentation(double scale) {
    if (scale <= 0.0) throw ConfigError("indentation scale must be > 0");
    Scenario s;
    s.name = "indentation";
    const double L = 1500.0, H = 250.0, W = 300.0;  // mm
    const int nx = std::max(2, static_cast<int>(std::lround(39 * scale)));
    const int ny = std::max(2, static_cast<int>(std::lround(9 * scale)));
    const int nz = std::max(2, static_cast<int>(std::lround(10 * scale)));
    s.mesh = make_box_mesh(axis_uniform(L, nx), axis_uniform(H, ny), axis_uniform(W, nz), 1);

    BulkMaterial beam;
    beam.model = BulkMaterial::Model::NeoHookean;
    beam.nh = NeoHookeanProps{689.6, 0.32, 1.0e-9};  // 6.896e8 Pa, 1000 kg/m^3
    s.materials.bulk[1] = beam;

    s.bcs.push_back({"clamp", "ymin"});
    s.contact_bset = "ymax";
    s.gravity = Vec3{};

    StrikerSpec& st = s.striker;
    st.shape = StrikerSpec::Shape::Cylinder;
    st.radius = 1000.0;
    st.width = 500.0;
    st.facet = std::min(20.0, L / nx / 2.0);
    st.free_motion = false;
    st.direction = Vec3{0, -1, 0};
    st.depth = 110.0;
    st.t0 = 0.0;
    st.tE = 0.05;
    // indenter axis offset a_x along the beam, standoff gap 10 mm above the
    // top face, centered across the width
    st.tip_position = Vec3{L / 2 + 250.0, H + 10.0, W / 2};

    s.time.t_end = 0.05;
    s.time.dt_fixed = 1e-5;
    s.time.scheme = Scheme::TW;
    s.time.phi = 1.033;
    s.time.output_every = 50;
    return s;
}

namespace {

double ply_thickness_of(const std::string& preset) {
    if (preset == "AS4/8552") return 0.181;
    if (preset == "T800S/M21") return 0.192;
    throw ConfigError("unknown material preset '" + preset + "'");
}

TransverseIsotropicProps bulk_preset(const std::string& name) {
    if (name == "AS4/8552") return as4_8552();
    if (name == "T800S/M21") return t800s_m21();
    throw ConfigError("unknown material preset '" + name + "'");
}

CohesiveProps interface_preset(const std::string& name) {
    CohesiveProps p;
    if (name == "AS4/8552") {
        p.GIc = 0.28; p.GIIc = 0.79;
        p.tauI = 74.2; p.tauII = 94.36;
        p.eta = 1.45; p.K = 2.5e4;
    } else if (name == "T800S/M21") {
        p.GIc = 0.308; p.GIIc = 0.828;
        p.tauI = 49.2; p.tauII = 80.7;
        p.eta = 1.75; p.K = 1.1e6;
    } else {
        throw ConfigError("unknown interface preset '" + name + "'");
    }
    return p;
}

}  // namespace

Scenario build_impact(const ImpactOptions& opt) {
    Scenario s;
    s.name = "impact";
    const double t_ply = ply_thickness_of(opt.material);
    PlateSpec plate;
    plate.length = opt.plate_length;
    plate.width = opt.plate_width;
    plate.ply_thickness = t_ply;
    plate.clusters = parse_layup(opt.layup, opt.symmetric);
    plate.elem_xy = opt.elem_xy > 0.0 ? opt.elem_xy
                                      : plate.clusters.front().plies * t_ply;
    s.mesh = make_plate_mesh(plate);

    BulkMaterial bulk;
    bulk.model = opt.damage ? BulkMaterial::Model::Damage : BulkMaterial::Model::Elastic;
    bulk.ti = bulk_preset(opt.material);
    s.materials.bulk[plate.bulk_material] = bulk;

    CohesiveProps coh = interface_preset(opt.material);
    if (coh.rho_bar <= 0.0) coh.rho_bar = bulk.ti.rho * t_ply / 2.0;
    s.materials.interface[plate.interface_material] = coh;

    s.bcs.push_back({"clamp", "support"});
    s.bcs.push_back({"fix_z", "clamps"});
    s.contact_bset = "top";
    s.gravity = opt.gravity_on ? Vec3{0, 0, -9810.0} : Vec3{};

    const double gap = 0.01;  // mm standoff
    double thickness = 0.0;
    for (const auto& c : plate.clusters) thickness += c.plies * t_ply;

    StrikerSpec& st = s.striker;
    st.shape = StrikerSpec::Shape::Sphere;
    st.radius = opt.striker_radius;
    st.facet = std::max(0.05, plate.elem_xy / 3.0);
    st.mass = opt.striker_mass_kg * 1e-3;  // kg -> tonne
    st.free_motion = true;
    st.fixed = {true, true, false};
    st.gravity = s.gravity;
    const double e_nmm = opt.energy_J * 1e3;
    const double v_target2 = 2.0 * e_nmm / st.mass;
    const double g_fall = opt.gravity_on ? 2.0 * 9810.0 * gap : 0.0;
    st.velocity = Vec3{0, 0, -std::sqrt(std::max(v_target2 - g_fall, 0.0))};
    st.tip_position = Vec3{plate.length / 2, plate.width / 2, thickness + gap};

    s.time.t_end = 5.0e-3;
    s.time.scheme = Scheme::TW;
    s.time.phi = 1.033;
    s.time.dt_safety = 0.9;
    s.time.output_every = 20;
    return s;
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

namespace {

struct Config {
    // section -> ordered (key, value) pairs; keys may repeat
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;

    bool has(const std::string& sec) const { return sections.count(sec) > 0; }

    const std::string* find(const std::string& sec, const std::string& key) const {
        const auto it = sections.find(sec);
        if (it == sections.end()) return nullptr;
        for (const auto& [k, v] : it->second)
            if (k == key) return &v;
        return nullptr;
    }
    std::string get(const std::string& sec, const std::string& key,
                    const std::string& fallback) const {
        const std::string* v = find(sec, key);
        return v ? *v : fallback;
    }
    double get_num(const std::string& sec, const std::string& key, double fallback) const {
        const std::string* v = find(sec, key);
        if (!v) return fallback;
        try {
            return std::stod(*v);
        } catch (const std::exception&) {
            throw ConfigError("bad number for " + sec + "." + key + ": '" + *v + "'");
        }
    }
    Vec3 get_vec(const std::string& sec, const std::string& key, const Vec3& fallback) const {
        const std::string* v = find(sec, key);
        if (!v) return fallback;
        std::istringstream in(*v);
        Vec3 out;
        if (!(in >> out.x >> out.y >> out.z))
            throw ConfigError("bad vector for " + sec + "." + key + ": '" + *v + "'");
        return out;
    }
};

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("bad section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || section.empty())
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        cfg.sections[section].push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
    }
    return cfg;
}

void apply_material_overrides(TransverseIsotropicProps& p, const Config& cfg,
                              const std::string& sec) {
    auto o = [&](const char* key, double& field) { field = cfg.get_num(sec, key, field); };
    o("E11", p.E11); o("E22", p.E22); o("nu12", p.nu12); o("nu23", p.nu23);
    o("G12", p.G12); o("G23", p.G23);
    o("XT", p.XT); o("XC", p.XC); o("YT", p.YT); o("YC", p.YC); o("SL", p.SL);
    o("GXT", p.GXT); o("GXC", p.GXC); o("GYT", p.GYT); o("GYC", p.GYC); o("GSL", p.GSL);
    o("fXT", p.fXT); o("fGT", p.fGT); o("fXC", p.fXC); o("fGC", p.fGC);
    o("Sp", p.Sp); o("Kp", p.Kp); o("rho", p.rho); o("alpha0", p.alpha0);
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    const Config cfg = parse_config(path);

    const std::string source = cfg.get("mesh", "source", "");
    if (source == "impact" || source == "indentation") {
        // convenience presets, optionally overridden below
        Scenario s;
        if (source == "indentation") {
            s = build_indentation(cfg.get_num("mesh", "scale", 1.0));
        } else {
            ImpactOptions opt;
            opt.material = cfg.get("layup", "material", opt.material);
            opt.layup = cfg.get("layup", "angles", opt.layup);
            opt.symmetric = cfg.get("layup", "symmetric", "true") == "true";
            opt.energy_J = cfg.get_num("ic", "energy_J", opt.energy_J);
            opt.striker_mass_kg = cfg.get_num("striker", "mass_kg", opt.striker_mass_kg);
            opt.striker_radius = cfg.get_num("striker", "radius", opt.striker_radius);
            opt.plate_length = cfg.get_num("mesh", "length", opt.plate_length);
            opt.plate_width = cfg.get_num("mesh", "width", opt.plate_width);
            opt.elem_xy = cfg.get_num("mesh", "elem_xy", 0.0);
            opt.damage = cfg.get("material:1", "damage", "on") != "off";
            opt.gravity_on = cfg.get("ic", "gravity", "on") != "off";
            s = build_impact(opt);
        }
        s.name = cfg.get("output", "name", s.name);
        s.ndivi = static_cast<int>(cfg.get_num("refine", "ndivi", s.ndivi));
        if (cfg.find("time", "t_end")) s.time.t_end = cfg.get_num("time", "t_end", s.time.t_end);
        if (cfg.find("time", "dt")) {
            const std::string dt = cfg.get("time", "dt", "auto");
            s.time.dt_fixed = (dt == "auto") ? -1.0 : std::stod(dt);
        }
        s.time.dt_safety = cfg.get_num("time", "dt_safety", s.time.dt_safety);
        s.time.scheme = scheme_from_name(cfg.get("time", "scheme",
                                                 s.time.scheme == Scheme::TW ? "tw" : "cd"));
        s.time.phi = cfg.get_num("time", "phi", s.time.phi);
        s.time.output_every =
            static_cast<int>(cfg.get_num("time", "output_every", s.time.output_every));
        s.time.max_steps =
            static_cast<long long>(cfg.get_num("time", "max_steps", -1.0));
        s.fields_output = cfg.get("output", "fields", "on") != "off";
        if (cfg.find("ic", "striker_velocity"))
            s.striker.velocity = cfg.get_vec("ic", "striker_velocity", s.striker.velocity);
        return s;
    }

    Scenario s;
    s.name = cfg.get("output", "name", "run");
    if (source == "file") {
        s.mesh = load_mesh(cfg.get("mesh", "path", ""));
    } else if (source == "box") {
        const double lx = cfg.get_num("mesh", "lx", 10.0);
        const double ly = cfg.get_num("mesh", "ly", 10.0);
        const double lz = cfg.get_num("mesh", "lz", 5.0);
        const double fine_half = cfg.get_num("mesh", "fine_half", 0.0);
        const double fine_h = cfg.get_num("mesh", "fine_h", 1.0);
        const double growth = cfg.get_num("mesh", "growth", 1.3);
        std::vector<double> xs, ys, zs;
        if (fine_half > 0.0) {
            xs = axis_graded_symmetric(fine_half, fine_h, lx / 2, growth);
            ys = axis_graded_symmetric(fine_half, fine_h, ly / 2, growth);
            const double fine_z = cfg.get_num("mesh", "fine_depth", fine_half);
            zs = axis_graded_top(fine_z, fine_h, lz, growth);
        } else {
            xs = axis_uniform(lx, std::max(1, (int)std::lround(lx / fine_h)));
            ys = axis_uniform(ly, std::max(1, (int)std::lround(ly / fine_h)));
            zs = axis_uniform(lz, std::max(1, (int)std::lround(lz / fine_h)));
            for (double& z : zs) z -= lz;  // top face at z = 0
        }
        s.mesh = make_box_mesh(xs, ys, zs, 1);
    } else if (source == "plate") {
        PlateSpec plate;
        plate.length = cfg.get_num("mesh", "length", plate.length);
        plate.width = cfg.get_num("mesh", "width", plate.width);
        plate.ply_thickness = cfg.get_num("layup", "ply_thickness", plate.ply_thickness);
        plate.clusters = parse_layup(cfg.get("layup", "angles", "0"),
                                     cfg.get("layup", "symmetric", "false") == "true");
        plate.elem_xy = cfg.get_num("mesh", "elem_xy",
                                    plate.clusters.front().plies * plate.ply_thickness);
        s.mesh = make_plate_mesh(plate);
    } else {
        throw ConfigError("mesh.source must be file|box|plate|impact|indentation");
    }

    // materials
    for (const auto& [sec, entries] : cfg.sections) {
        if (sec.rfind("material:", 0) == 0) {
            const int id = std::stoi(sec.substr(9));
            BulkMaterial bm;
            const std::string model = cfg.get(sec, "model", "elastic");
            if (model == "neo_hookean") {
                bm.model = BulkMaterial::Model::NeoHookean;
                bm.nh.E = cfg.get_num(sec, "E", 0.0);
                bm.nh.nu = cfg.get_num(sec, "nu", 0.0);
                bm.nh.rho = cfg.get_num(sec, "rho", 0.0);
            } else {
                bm.model = (model == "damage") ? BulkMaterial::Model::Damage
                                               : BulkMaterial::Model::Elastic;
                const std::string preset = cfg.get(sec, "preset", "");
                if (!preset.empty())
                    bm.ti = bulk_preset(preset);
                else if (cfg.find(sec, "E")) {
                    bm.ti = isotropic_elastic(cfg.get_num(sec, "E", 0.0),
                                              cfg.get_num(sec, "nu", 0.0),
                                              cfg.get_num(sec, "rho", 0.0));
                }
                apply_material_overrides(bm.ti, cfg, sec);
            }
            s.materials.bulk[id] = bm;
        } else if (sec.rfind("interface:", 0) == 0) {
            const int id = std::stoi(sec.substr(10));
            CohesiveProps p;
            const std::string preset = cfg.get(sec, "preset", "");
            if (!preset.empty()) p = interface_preset(preset);
            p.GIc = cfg.get_num(sec, "GIc", p.GIc);
            p.GIIc = cfg.get_num(sec, "GIIc", p.GIIc);
            p.tauI = cfg.get_num(sec, "tauI", p.tauI);
            p.tauII = cfg.get_num(sec, "tauII", p.tauII);
            p.eta = cfg.get_num(sec, "eta", p.eta);
            p.K = cfg.get_num(sec, "Kcoh", p.K);
            p.rho_bar = cfg.get_num(sec, "rhobar", p.rho_bar);
            s.materials.interface[id] = p;
        }
    }

    // boundary conditions
    if (cfg.has("bc"))
        for (const auto& [k, v] : cfg.sections.at("bc"))
            if (k == "clamp" || k == "fix_x" || k == "fix_y" || k == "fix_z")
                s.bcs.push_back({k, v});
            else if (k == "contact")
                s.contact_bset = v;
            else
                throw ConfigError("unknown bc entry '" + k + "'");

    s.gravity = cfg.get_vec("ic", "gravity_vec", Vec3{});

    // striker
    StrikerSpec& st = s.striker;
    const std::string shape = cfg.get("striker", "shape", "sphere");
    st.shape = (shape == "cylinder") ? StrikerSpec::Shape::Cylinder
               : (shape == "plane")  ? StrikerSpec::Shape::Plane
                                     : StrikerSpec::Shape::Sphere;
    st.radius = cfg.get_num("striker", "radius", st.radius);
    st.width = cfg.get_num("striker", "width", st.width);
    st.facet = cfg.get_num("striker", "facet", st.facet);
    st.mass = cfg.get_num("striker", "mass_kg", 0.0) * 1e-3;
    st.free_motion = cfg.get("striker", "motion", "free") != "prescribed";
    st.tip_position = cfg.get_vec("striker", "tip", Vec3{});
    st.velocity = cfg.get_vec("ic", "striker_velocity", Vec3{});
    st.gravity = s.gravity;
    st.direction = cfg.get_vec("striker", "direction", Vec3{0, 0, -1});
    st.depth = cfg.get_num("striker", "depth", 0.0);
    st.t0 = cfg.get_num("striker", "t0", 0.0);
    st.tE = cfg.get_num("striker", "tE", 0.0);

    // time
    s.time.t_end = cfg.get_num("time", "t_end", 1e-3);
    const std::string dt = cfg.get("time", "dt", "auto");
    s.time.dt_fixed = (dt == "auto") ? -1.0 : std::stod(dt);
    s.time.dt_safety = cfg.get_num("time", "dt_safety", 0.9);
    s.time.scheme = scheme_from_name(cfg.get("time", "scheme", "tw"));
    s.time.phi = cfg.get_num("time", "phi", 1.033);
    s.time.output_every = static_cast<int>(cfg.get_num("time", "output_every", 1));
    s.time.max_steps = static_cast<long long>(cfg.get_num("time", "max_steps", -1.0));
    s.ndivi = static_cast<int>(cfg.get_num("refine", "ndivi", 0));
    s.fields_output = cfg.get("output", "fields", "on") != "off";
    return s;
}

// ---------------------------------------------------------------------------
// Run preparation
// ---------------------------------------------------------------------------

PreparedRun prepare_run(const Scenario& scenario, ThreadPool& pool, int ndivi_override) {
    PreparedRun run;
    const int ndivi = ndivi_override >= 0 ? ndivi_override : scenario.ndivi;

    MeshModel mesh = scenario.mesh;
    for (int l = 0; l < ndivi; ++l) {
        run.refine_levels.push_back(get_dimensions(mesh));
        mesh = divide_mesh(mesh, 1);
    }
    validate_mesh(mesh);

    // crack-band validity per damage-material block
    Index gid = 0;
    for (const auto& blk : mesh.blocks) {
        if (is_bulk(blk.kind)) {
            const auto it = scenario.materials.bulk.find(blk.material_id);
            if (it != scenario.materials.bulk.end() &&
                it->second.model == BulkMaterial::Model::Damage) {
                double lc_max = 0.0;
                for (Index e = 0; e < blk.size(); ++e)
                    lc_max = std::max(lc_max, std::cbrt(element_volume(mesh, gid + e)));
                check_crack_band(it->second.ti, lc_max,
                                 "material " + std::to_string(blk.material_id));
            }
        }
        gid += blk.size();
    }

    // penalty-stiffness advisory
    if (!scenario.materials.interface.empty()) {
        double zmin = 1e300, zmax = -1e300;
        for (const auto& p : mesh.nodes) {
            zmin = std::min(zmin, p.z);
            zmax = std::max(zmax, p.z);
        }
        double E_T = 0.0;
        for (const auto& [id, bm] : scenario.materials.bulk)
            if (bm.model != BulkMaterial::Model::NeoHookean) E_T = std::max(E_T, bm.ti.E22);
        const double t_lam = std::max(1e-12, 0.5 * (zmax - zmin));
        for (const auto& [id, p] : scenario.materials.interface) {
            const double kmin = penalty_stiffness_min(E_T, t_lam);
            if (E_T > 0.0 && p.K < kmin) {
                std::ostringstream w;
                w << "interface material " << id << ": K_coh = " << p.K
                  << " N/mm^3 is below the compliance guideline 50*E_T/t_lam = " << kmin
                  << " N/mm^3";
                run.warnings.push_back(w.str());
            }
        }
    }

    run.discretization = std::make_shared<Discretization>(mesh, scenario.materials, pool);
    run.refined_mesh = std::move(mesh);

    BoundaryConditions bc;
    bc.resize(run.refined_mesh.node_count_total());
    for (const auto& b : scenario.bcs) {
        const NodeSet& ns = run.refined_mesh.nset(b.nset);
        for (Index n : ns.nodes) {
            if (b.mode == "clamp") bc.fix_node(n);
            else if (b.mode == "fix_x") bc.fix_dof(n, 0);
            else if (b.mode == "fix_y") bc.fix_dof(n, 1);
            else if (b.mode == "fix_z") bc.fix_dof(n, 2);
            else throw ConfigError("unknown bc mode '" + b.mode + "'");
        }
    }

    std::set<Index> surf_nodes;
    for (const auto& f : extract_surface(run.refined_mesh, scenario.contact_bset))
        for (int i = 0; i < f.n_nodes; ++i) surf_nodes.insert(f.nodes[i]);

    run.deformable = std::make_unique<DeformableInstance>(
        run.discretization, std::move(bc),
        std::vector<Index>(surf_nodes.begin(), surf_nodes.end()), scenario.gravity);

    // striker surface authored at its initial global position
    const StrikerSpec& st = scenario.striker;
    TriSurface surf;
    Vec3 center_shift;
    switch (st.shape) {
        case StrikerSpec::Shape::Sphere:
            surf = make_spherical_cap(st.radius, 0.9, st.facet);
            center_shift = st.tip_position + Vec3{0, 0, st.radius};
            break;
        case StrikerSpec::Shape::Cylinder:
            surf = make_cylinder_patch(st.radius, st.width, 1.4, st.facet);
            center_shift = st.tip_position + Vec3{0, st.radius, 0};
            break;
        case StrikerSpec::Shape::Plane:
            surf = make_plane_patch(st.width, st.width,
                                    std::max(1, (int)std::lround(st.width / st.facet)),
                                    std::max(1, (int)std::lround(st.width / st.facet)));
            center_shift = st.tip_position;
            break;
    }
    for (auto& p : surf.points) p += center_shift;

    if (st.free_motion) {
        RigidBodyState body;
        body.mass = st.mass;
        if (body.mass <= 0.0) throw ConfigError("free striker needs a positive mass");
        body.pos = center_shift;
        body.vel = st.velocity;
        body.gravity = st.gravity;
        body.fixed = st.fixed;
        for (int i = 0; i < 3; ++i)
            if (body.fixed[i]) body.vel[i] = 0.0;
        run.rigid = std::make_unique<RigidInstance>(MasterSurface(std::move(surf)), body);
    } else {
        const StrikerSpec spec = st;  // copy for the closure
        run.rigid = std::make_unique<RigidInstance>(
            MasterSurface(std::move(surf)), [spec](double t) {
                return spec.direction *
                       (spec.depth * smooth_step(t, spec.t0, spec.tE, 0.0, 1.0));
            });
    }

    run.time = scenario.time;
    return run;
}

} // namespace pdn
