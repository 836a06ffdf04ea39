#include "pdn/output.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace pdn {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "t,f_n,f_t1,f_t2,d_striker,ke,ie,de,n_contact,resets\n";
    for (const auto& r : rows)
        out << fmt(r.t) << ',' << fmt(r.f_n) << ',' << fmt(r.f_t1) << ',' << fmt(r.f_t2) << ','
            << fmt(r.d_striker) << ',' << fmt(r.ke) << ',' << fmt(r.ie) << ',' << fmt(r.de)
            << ',' << r.n_contact << ',' << r.resets << '\n';
}

void write_contact_log_csv(const std::string& path, const std::vector<HistoryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "step,time,n_constrained,n_released,resets,f_normal\n";
    for (const auto& r : rows)
        out << r.step << ',' << fmt(r.t) << ',' << r.n_contact << ',' << r.released << ','
            << r.resets << ',' << fmt(r.f_n) << '\n';
}

void write_vtk_snapshot(const std::string& path, const MeshModel& mesh,
                        const std::vector<double>& displacement,
                        const std::vector<double>& d1, const std::vector<double>& d2,
                        const std::vector<double>& dcoh) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "# vtk DataFile Version 3.0\n";
    out << "pdn-impact snapshot\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.nodes.size() << " double\n";
    for (const auto& p : mesh.nodes)
        out << fmt(p.x) << ' ' << fmt(p.y) << ' ' << fmt(p.z) << '\n';

    Index n_cells = 0, list_size = 0;
    for (const auto& blk : mesh.blocks) {
        n_cells += blk.size();
        list_size += blk.size() * (1 + node_count(blk.kind));
    }
    out << "CELLS " << n_cells << ' ' << list_size << '\n';
    for (const auto& blk : mesh.blocks) {
        const int npe = node_count(blk.kind);
        for (Index e = 0; e < blk.size(); ++e) {
            out << npe;
            const Index* c = blk.nodes_of(e);
            for (int a = 0; a < npe; ++a) out << ' ' << c[a];
            out << '\n';
        }
    }
    out << "CELL_TYPES " << n_cells << '\n';
    for (const auto& blk : mesh.blocks) {
        int vtk_type = 12;  // hexahedron
        switch (blk.kind) {
            case ElementKind::HEX8:
            case ElementKind::ELINT8: vtk_type = 12; break;
            case ElementKind::TET4: vtk_type = 10; break;
            case ElementKind::QUAD4: vtk_type = 9; break;
            case ElementKind::TRI3: vtk_type = 5; break;
        }
        for (Index e = 0; e < blk.size(); ++e) out << vtk_type << '\n';
    }

    out << "POINT_DATA " << mesh.nodes.size() << '\n';
    out << "VECTORS displacement double\n";
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
        out << fmt(displacement[3 * n]) << ' ' << fmt(displacement[3 * n + 1]) << ' '
            << fmt(displacement[3 * n + 2]) << '\n';

    out << "CELL_DATA " << n_cells << '\n';
    const struct {
        const char* name;
        const std::vector<double>* data;
    } fields[3] = {{"D1", &d1}, {"D2", &d2}, {"D_coh", &dcoh}};
    for (const auto& f : fields) {
        if (f.data->empty()) continue;
        out << "SCALARS " << f.name << " double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (Index e = 0; e < n_cells; ++e) out << fmt((*f.data)[e]) << '\n';
    }
}

void write_summary_json(const std::string& path, const RunReport& r) {
    nlohmann::json j;
    j["mesh"] = {{"elements", r.realized.n_e},
                 {"nodes", r.realized.n_n},
                 {"boundary_facets", r.realized.n_b}};
    j["dt"] = r.dt;
    j["steps"] = r.steps;
    j["threads"] = r.threads;
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lv : r.refine_levels)
        levels.push_back({{"predicted_elements", lv.n_e},
                          {"predicted_nodes", lv.n_n},
                          {"predicted_boundary_facets", lv.n_b}});
    j["refine_levels"] = levels;
    j["energy_balance_residual"] = r.history.energy_residual;
    j["worst_gap"] = r.history.worst_gap;
    j["ambiguous_projections"] = r.history.ambiguous_projections;
    j["timings"] = {{"wall", r.wall_seconds},
                    {"assembly", r.assembly_seconds},
                    {"exchange", r.exchange_seconds},
                    {"contact_projection", r.projection_seconds},
                    {"io", r.io_seconds}};
    j["warnings"] = r.warnings;
    if (!r.history.rows.empty()) {
        const auto& last = r.history.rows.back();
        j["final"] = {{"t", last.t},
                      {"kinetic", last.ke},
                      {"internal", last.ie},
                      {"dissipated", last.de},
                      {"striker_ke", last.ke_striker}};
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

RunReport run_scenario(const Scenario& scenario, const RunOptions& opt) {
    namespace fs = std::filesystem;
    const auto wall0 = std::chrono::steady_clock::now();

    ThreadPool pool(static_cast<std::size_t>(std::max(1, opt.threads)));
    PreparedRun run = prepare_run(scenario, pool, opt.ndivi);

    TimeLoopConfig time_cfg = run.time;
    if (!opt.scheme.empty()) time_cfg.scheme = scheme_from_name(opt.scheme);
    if (opt.steps_cap >= 0) time_cfg.max_steps = opt.steps_cap;

    fs::create_directories(opt.out_dir);

    RunReport report;
    report.threads = opt.threads;
    report.warnings = run.warnings;
    report.refine_levels = run.refine_levels;
    report.realized = RefineDims{run.refined_mesh.element_count(),
                                 run.refined_mesh.node_count_total(),
                                 run.refined_mesh.boundary_facet_count()};

    double io_seconds = 0.0;
    long long output_count = 0;
    const OutputCallback on_output = [&](const HistoryRow& row,
                                         const DeformableInstance& def) -> bool {
        ++output_count;
        if (scenario.fields_output && opt.snapshot_stride > 0 &&
            (output_count % opt.snapshot_stride) == 1) {
            const auto t0 = std::chrono::steady_clock::now();
            char name[64];
            std::snprintf(name, sizeof name, "snapshot_%06lld.vtk",
                          static_cast<long long>(row.step));
            const std::string path = (fs::path(opt.out_dir) / name).string();
            write_vtk_snapshot(path, def.discretization().mesh(), def.state().d,
                               def.discretization().field_d1(), def.discretization().field_d2(),
                               def.discretization().field_cohesive_damage());
            report.snapshot_paths.push_back(path);
            io_seconds +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        return true;
    };

    report.history = run_coupled(*run.rigid, *run.deformable, time_cfg, on_output);
    report.steps = report.history.steps;
    report.dt = report.history.dt;

    {
        const auto t0 = std::chrono::steady_clock::now();
        report.csv_path = (fs::path(opt.out_dir) / "history.csv").string();
        write_history_csv(report.csv_path, report.history.rows);
        report.contact_log_path = (fs::path(opt.out_dir) / "contact_log.csv").string();
        write_contact_log_csv(report.contact_log_path, report.history.rows);
        io_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    report.assembly_seconds = run.discretization->assembly_seconds();
    report.exchange_seconds = run.deformable->exchange_seconds();
    report.projection_seconds = run.rigid->projection_seconds();
    report.io_seconds = io_seconds;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    report.summary_path = (fs::path(opt.out_dir) / "summary.json").string();
    write_summary_json(report.summary_path, report);
    return report;
}

std::vector<BenchPoint> scale_bench(const Scenario& scenario, const std::vector<int>& threads,
                                    long long steps) {
    std::vector<BenchPoint> out;
    for (int n : threads) {
        ThreadPool pool(static_cast<std::size_t>(std::max(1, n)));
        PreparedRun run = prepare_run(scenario, pool, -1);
        TimeLoopConfig cfg = run.time;
        cfg.max_steps = steps;
        cfg.output_every = std::max<long long>(1, steps);  // end-only output
        const auto t0 = std::chrono::steady_clock::now();
        run_coupled(*run.rigid, *run.deformable, cfg, {});
        BenchPoint p;
        p.threads = n;
        p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(p);
    }
    if (!out.empty()) {
        const double t0 = out.front().seconds;
        const double n0 = out.front().threads;
        for (auto& p : out) {
            p.speedup = t0 / p.seconds;
            p.efficiency = t0 * n0 / (p.seconds * p.threads);
        }
    }
    return out;
}

} // namespace pdn
