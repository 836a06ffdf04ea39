#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pdn/output.hpp"

namespace {

std::vector<int> parse_thread_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw pdn::ConfigError("empty thread list");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pdn-impact: explicit-dynamics impact solver with partial "
                 "Dirichlet-Neumann contact"};
    app.require_subcommand(1);

    std::string cfg_path, out_dir = "out", scheme, thread_list = "1,2,4,8";
    int ndivi = -1, threads = 1;
    long long steps = -1;
    unsigned seed = 0;

    CLI::App* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", cfg_path, "scenario config file")->required();
    run->add_option("--ndivi", ndivi, "mesh multiplication levels (overrides config)");
    run->add_option("--threads", threads, "data-parallel worker count");
    run->add_option("--scheme", scheme, "time scheme override: tw|cd");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--steps", steps, "cap the number of time steps");
    run->add_option("--seed", seed, "seed recorded in the summary (test tooling)");

    CLI::App* bench = app.add_subcommand("bench", "strong-scaling measurement");
    bench->add_option("config", cfg_path, "scenario config file")->required();
    bench->add_option("--threads", thread_list, "comma-separated worker counts");
    bench->add_option("--steps", steps, "fixed step count per point (default 200)");
    bench->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        const pdn::Scenario scenario = pdn::load_scenario(cfg_path);

        if (run->parsed()) {
            pdn::RunOptions opt;
            opt.out_dir = out_dir;
            opt.threads = threads;
            opt.ndivi = ndivi;
            opt.scheme = scheme;
            opt.steps_cap = steps;
            opt.seed = seed;
            const pdn::RunReport report = pdn::run_scenario(scenario, opt);
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
            std::printf("mesh: %lld elements, %lld nodes, %lld boundary facets\n",
                        (long long)report.realized.n_e, (long long)report.realized.n_n,
                        (long long)report.realized.n_b);
            for (std::size_t l = 0; l < report.refine_levels.size(); ++l)
                std::printf("refine level %zu predicted: %lld elements, %lld nodes, %lld "
                            "boundary facets\n",
                            l + 1, (long long)report.refine_levels[l].n_e,
                            (long long)report.refine_levels[l].n_n,
                            (long long)report.refine_levels[l].n_b);
            std::printf("dt = %.6e s, %lld steps, wall %.2f s (assembly %.2f, exchange %.2f, "
                        "projection %.2f, io %.2f)\n",
                        report.dt, report.steps, report.wall_seconds, report.assembly_seconds,
                        report.exchange_seconds, report.projection_seconds, report.io_seconds);
            std::printf("wrote %s, %s, %s\n", report.csv_path.c_str(),
                        report.contact_log_path.c_str(), report.summary_path.c_str());
        } else {
            const std::vector<int> counts = parse_thread_list(thread_list);
            const long long n_steps = steps > 0 ? steps : 200;
            const auto points = pdn::scale_bench(scenario, counts, n_steps);
            std::printf("threads,seconds,speedup,efficiency\n");
            for (const auto& p : points)
                std::printf("%d,%.4f,%.4f,%.4f\n", p.threads, p.seconds, p.speedup,
                            p.efficiency);
        }
    } catch (const pdn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const pdn::ParseError& e) {
        std::cerr << "mesh parse error: " << e.what() << "\n";
        return 3;
    } catch (const pdn::ValidationError& e) {
        std::cerr << "mesh validation error: " << e.what() << "\n";
        return 4;
    } catch (const pdn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
