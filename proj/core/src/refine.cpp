#include "pdn/refine.hpp"

#include <algorithm>
#include <unordered_set>

namespace pdn {

namespace {

std::array<Index, 2> edge_key(Index a, Index b) {
    return a < b ? std::array<Index, 2>{a, b} : std::array<Index, 2>{b, a};
}

std::array<Index, 4> face_key(Index a, Index b, Index c, Index d) {
    std::array<Index, 4> k{a, b, c, d};
    std::sort(k.begin(), k.end());
    return k;
}

// hex corner local index from lattice parity (i,j,k in {0,1})
constexpr int kCornerOf[2][2][2] = {{{0, 4}, {3, 7}}, {{1, 5}, {2, 6}}};

struct LevelMaps {
    std::map<std::array<Index, 2>, Index> edge_node;  // dividing edges -> new node id
    std::map<std::array<Index, 4>, Index> face_node;  // dividing faces -> new node id
    std::vector<Index> center_node;                   // per global element (-1 if none)
};

}  // namespace

RefinementPlan make_refinement_plan(const MeshModel& model) {
    RefinementPlan plan;
    Index gid = 0;
    for (const auto& blk : model.blocks) {
        if (blk.kind != ElementKind::HEX8 && blk.kind != ElementKind::ELINT8)
            throw UnsupportedKindError(std::string("mesh multiplication supports HEX8 and "
                                                   "ELINT8 only, found ") +
                                       kind_name(blk.kind));
        for (Index e = 0; e < blk.size(); ++e, ++gid) {
            const Index* c = blk.nodes_of(e);
            if (blk.kind == ElementKind::HEX8) {
                for (const auto& ed : kHexEdges) plan.edges[edge_key(c[ed[0]], c[ed[1]])] = false;
                for (const auto& fc : kHexFaces)
                    plan.faces[face_key(c[fc[0]], c[fc[1]], c[fc[2]], c[fc[3]])] = false;
            } else {
                // in-plane edges and facet faces divide; through-thickness
                // edges and lateral faces do not
                for (int i = 0; i < 4; ++i) {
                    plan.edges[edge_key(c[i], c[(i + 1) % 4])] = false;
                    plan.edges[edge_key(c[4 + i], c[4 + (i + 1) % 4])] = false;
                    plan.edges[edge_key(c[i], c[i + 4])] = true;
                }
                plan.faces[face_key(c[0], c[1], c[2], c[3])] = false;
                plan.faces[face_key(c[4], c[5], c[6], c[7])] = false;
                for (int i = 0; i < 4; ++i) {
                    const int j = (i + 1) % 4;
                    plan.faces[face_key(c[i], c[j], c[4 + j], c[4 + i])] = true;
                }
            }
        }
    }

    Index n_bulk = 0, n_elint = 0;
    for (const auto& blk : model.blocks)
        (blk.kind == ElementKind::HEX8 ? n_bulk : n_elint) += blk.size();

    Index n_edges_int = 0, n_faces_int = 0;
    for (const auto& [k, is_int] : plan.edges) n_edges_int += is_int ? 1 : 0;
    for (const auto& [k, is_int] : plan.faces) n_faces_int += is_int ? 1 : 0;

    Index n_b_elint = 0;
    for (const auto& s : model.bsets)
        for (const auto& f : s.facets)
            if (model.kind_of(f.element) == ElementKind::ELINT8 && f.local_face >= 2)
                ++n_b_elint;

    const Index n_e0 = n_bulk + n_elint;
    const Index n_edges = static_cast<Index>(plan.edges.size());
    const Index n_faces = static_cast<Index>(plan.faces.size());

    plan.predicted.n_e = 8 * n_e0 - 4 * n_elint;
    plan.predicted.n_n = model.node_count_total() + n_edges + n_faces + (n_e0 - n_elint) -
                         n_edges_int - n_faces_int;
    plan.predicted.n_b = 4 * model.boundary_facet_count() - 2 * n_b_elint;
    return plan;
}

RefineDims get_dimensions(const MeshModel& model) { return make_refinement_plan(model).predicted; }

double child_length_scale(double parent_lc, int ndivi) {
    return parent_lc / static_cast<double>(1 << ndivi);
}

namespace {

MeshModel divide_once(const MeshModel& model) {
    const RefinementPlan plan = make_refinement_plan(model);

    MeshModel out;
    out.nodes = model.nodes;
    out.nodes.reserve(plan.predicted.n_n);

    LevelMaps maps;
    // new node numbering: originals, then edge midpoints in key order, then
    // face centers in key order, then bulk element centers in element order;
    // deterministic for any worker count by construction
    for (const auto& [k, is_int] : plan.edges) {
        if (is_int) continue;
        maps.edge_node[k] = static_cast<Index>(out.nodes.size());
        out.nodes.push_back(0.5 * (model.nodes[k[0]] + model.nodes[k[1]]));
    }
    for (const auto& [k, is_int] : plan.faces) {
        if (is_int) continue;
        maps.face_node[k] = static_cast<Index>(out.nodes.size());
        out.nodes.push_back(0.25 * (model.nodes[k[0]] + model.nodes[k[1]] + model.nodes[k[2]] +
                                    model.nodes[k[3]]));
    }
    maps.center_node.assign(model.element_count(), -1);
    {
        Index gid = 0;
        for (const auto& blk : model.blocks)
            for (Index e = 0; e < blk.size(); ++e, ++gid)
                if (blk.kind == ElementKind::HEX8) {
                    const Index* c = blk.nodes_of(e);
                    Vec3 ctr{};
                    for (int a = 0; a < 8; ++a) ctr += model.nodes[c[a]];
                    maps.center_node[gid] = static_cast<Index>(out.nodes.size());
                    out.nodes.push_back(ctr * 0.125);
                }
    }

    // hex lattice lookup: position p,q,r in {0,1,2}^3 of the refined lattice
    auto hex_lattice = [&](const Index* c, Index gid, int p, int q, int r) -> Index {
        const int np = (p == 1) + (q == 1) + (r == 1);
        if (np == 0) return c[kCornerOf[p / 2][q / 2][r / 2]];
        if (np == 3) return maps.center_node[gid];
        if (np == 1) {
            // edge midpoint: endpoints are the two lattice corners adjacent
            // along the odd axis
            int pa = p, qa = q, ra = r, pb = p, qb = q, rb = r;
            if (p == 1) { pa = 0; pb = 2; }
            if (q == 1) { qa = 0; qb = 2; }
            if (r == 1) { ra = 0; rb = 2; }
            const Index na = c[kCornerOf[pa / 2][qa / 2][ra / 2]];
            const Index nb = c[kCornerOf[pb / 2][qb / 2][rb / 2]];
            return maps.edge_node.at(edge_key(na, nb));
        }
        // np == 2: face center; collect the four corners of the face
        std::array<Index, 4> fn{};
        int idx = 0;
        for (int dp = 0; dp < 2; ++dp)
            for (int dq = 0; dq < 2; ++dq) {
                int pp = p, qq = q, rr = r;
                if (p == 1 && q == 1) { pp = 2 * dp; qq = 2 * dq; }
                else if (p == 1 && r == 1) { pp = 2 * dp; rr = 2 * dq; }
                else { qq = 2 * dp; rr = 2 * dq; }
                fn[idx++] = c[kCornerOf[pp / 2][qq / 2][rr / 2]];
            }
        return maps.face_node.at(face_key(fn[0], fn[1], fn[2], fn[3]));
    };

    // quad lattice for an ELINT facet (n0..n3 counterclockwise): p,q in {0,1,2}
    auto quad_lattice = [&](const Index* n, int p, int q) -> Index {
        static const int corner[2][2] = {{0, 3}, {1, 2}};
        if (p != 1 && q != 1) return n[corner[p / 2][q / 2]];
        if (p == 1 && q == 1)
            return maps.face_node.at(face_key(n[0], n[1], n[2], n[3]));
        Index a, b;
        if (q != 1) { a = n[corner[0][q / 2]]; b = n[corner[1][q / 2]]; }
        else { a = n[corner[p / 2][0]]; b = n[corner[p / 2][1]]; }
        return maps.edge_node.at(edge_key(a, b));
    };

    // children, block by block; child ordering inside a parent is fixed
    std::vector<Index> child_base(model.element_count() + 1, 0);
    {
        Index gid = 0, base = 0;
        for (const auto& blk : model.blocks)
            for (Index e = 0; e < blk.size(); ++e, ++gid) {
                child_base[gid] = base;
                base += (blk.kind == ElementKind::HEX8) ? 8 : 4;
            }
        child_base[model.element_count()] = base;
    }

    Index gid = 0;
    for (const auto& blk : model.blocks) {
        ElementBlock nb;
        nb.kind = blk.kind;
        nb.material_id = blk.material_id;
        for (Index e = 0; e < blk.size(); ++e, ++gid) {
            const Index* c = blk.nodes_of(e);
            if (blk.kind == ElementKind::HEX8) {
                // emit children in corner order 0..7
                static const int co[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                             {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
                for (int a = 0; a < 8; ++a) {
                    const int i = co[a][0], j = co[a][1], k = co[a][2];
                    const Index child[8] = {
                        hex_lattice(c, gid, i, j, k),         hex_lattice(c, gid, i + 1, j, k),
                        hex_lattice(c, gid, i + 1, j + 1, k), hex_lattice(c, gid, i, j + 1, k),
                        hex_lattice(c, gid, i, j, k + 1),     hex_lattice(c, gid, i + 1, j, k + 1),
                        hex_lattice(c, gid, i + 1, j + 1, k + 1),
                        hex_lattice(c, gid, i, j + 1, k + 1)};
                    nb.connectivity.insert(nb.connectivity.end(), child, child + 8);
                }
            } else {
                const Index* bot = c;
                const Index* top = c + 4;
                static const int qo[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
                for (int a = 0; a < 4; ++a) {
                    const int i = qo[a][0], j = qo[a][1];
                    const Index child[8] = {
                        quad_lattice(bot, i, j),         quad_lattice(bot, i + 1, j),
                        quad_lattice(bot, i + 1, j + 1), quad_lattice(bot, i, j + 1),
                        quad_lattice(top, i, j),         quad_lattice(top, i + 1, j),
                        quad_lattice(top, i + 1, j + 1), quad_lattice(top, i, j + 1)};
                    nb.connectivity.insert(nb.connectivity.end(), child, child + 8);
                }
            }
        }
        out.blocks.push_back(std::move(nb));
    }

    // per-element fields inherited by all children
    {
        Index g = 0;
        for (const auto& blk : model.blocks)
            for (Index e = 0; e < blk.size(); ++e, ++g) {
                const int nc = (blk.kind == ElementKind::HEX8) ? 8 : 4;
                const auto fr = model.frames.find(g);
                const auto pa = model.ply_angles.find(g);
                const auto st = model.stacking.find(g);
                for (int a = 0; a < nc; ++a) {
                    const Index cg = child_base[g] + a;
                    if (fr != model.frames.end()) out.frames[cg] = fr->second;
                    if (pa != model.ply_angles.end()) out.ply_angles[cg] = pa->second;
                    if (st != model.stacking.end()) out.stacking[cg] = st->second;
                }
            }
    }

    // boundary sets
    for (const auto& s : model.bsets) {
        BoundarySet ns;
        ns.name = s.name;
        for (const auto& f : s.facets) {
            const ElementKind k = model.kind_of(f.element);
            if (k == ElementKind::HEX8) {
                for (int corner = 0; corner < 4; ++corner) {
                    const int local_corner = kHexFaces[f.local_face][corner];
                    ns.facets.push_back(FacetRef{child_base[f.element] + local_corner,
                                                 f.local_face});
                }
            } else {  // ELINT8
                // quadrant of each bottom-facet corner owns the child facet
                static const int quad_of_corner[4] = {0, 1, 2, 3};
                if (f.local_face < 2) {
                    for (int corner = 0; corner < 4; ++corner)
                        ns.facets.push_back(
                            FacetRef{child_base[f.element] + quad_of_corner[corner],
                                     f.local_face});
                } else {
                    // lateral face spans bottom corners (lf-2, lf-1 mod 4)
                    const int c0 = kHexFaces[f.local_face][0];
                    const int c1 = kHexFaces[f.local_face][1];
                    ns.facets.push_back(FacetRef{child_base[f.element] + c0, f.local_face});
                    ns.facets.push_back(FacetRef{child_base[f.element] + c1, f.local_face});
                }
            }
        }
        out.bsets.push_back(std::move(ns));
    }

    // node sets: closure over fully contained edges/faces/cells
    for (const auto& s : model.nsets) {
        std::unordered_set<Index> in(s.nodes.begin(), s.nodes.end());
        NodeSet ns;
        ns.name = s.name;
        ns.nodes = s.nodes;
        for (const auto& [k, id] : maps.edge_node)
            if (in.count(k[0]) && in.count(k[1])) ns.nodes.push_back(id);
        for (const auto& [k, id] : maps.face_node)
            if (in.count(k[0]) && in.count(k[1]) && in.count(k[2]) && in.count(k[3]))
                ns.nodes.push_back(id);
        {
            Index g = 0;
            for (const auto& blk : model.blocks)
                for (Index e = 0; e < blk.size(); ++e, ++g)
                    if (maps.center_node[g] >= 0) {
                        const Index* c = blk.nodes_of(e);
                        bool all = true;
                        for (int a = 0; a < 8 && all; ++a) all = in.count(c[a]) > 0;
                        if (all) ns.nodes.push_back(maps.center_node[g]);
                    }
        }
        std::sort(ns.nodes.begin(), ns.nodes.end());
        out.nsets.push_back(std::move(ns));
    }

    const RefineDims got{out.element_count(), out.node_count_total(),
                         out.boundary_facet_count()};
    if (got.n_e != plan.predicted.n_e || got.n_n != plan.predicted.n_n ||
        got.n_b != plan.predicted.n_b)
        throw Error("mesh multiplication count mismatch: predicted (" +
                    std::to_string(plan.predicted.n_e) + ", " + std::to_string(plan.predicted.n_n) +
                    ", " + std::to_string(plan.predicted.n_b) + ") realized (" +
                    std::to_string(got.n_e) + ", " + std::to_string(got.n_n) + ", " +
                    std::to_string(got.n_b) + ")");
    return out;
}

}  // namespace

MeshModel divide_mesh(const MeshModel& model, int ndivi) {
    if (ndivi < 0) throw Error("ndivi must be >= 0");
    MeshModel m = model;
    for (int l = 0; l < ndivi; ++l) m = divide_once(m);
    return m;
}

} // namespace pdn
