#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "specnet/datasets.hpp"
#include "specnet/pipeline.hpp"

using namespace specnet;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

void write_csv_dir(const std::string& dir, const IdentificationReport& r) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream o(fs::path(dir) / "dmd_eigs.csv");
        write_eigenvalues_csv(o, r.dmd_eigs);
    }
    {
        std::ofstream o(fs::path(dir) / "filtered_eigs.csv");
        write_eigenvalues_csv(o, r.filtered_eigs);
    }
    if (r.recovered) {
        std::ofstream o(fs::path(dir) / "recovered.csv");
        write_recovered_csv(o, *r.recovered);
    }
    if (!r.clusters.empty()) {
        std::ofstream o(fs::path(dir) / "clusters.csv");
        write_clusters_csv(o, r.clusters);
    }
    if (r.truth) {
        std::ofstream o(fs::path(dir) / "true_spectrum.csv");
        write_eigenvalues_csv(o, r.truth->spectrum);
    }
}

struct Output {
    bool as_json = false;
    bool no_timings = false;
    std::string csv_dir;
    std::string out_file;
};

void emit_report(const IdentificationReport& r, const Output& o) {
    std::string text = o.as_json ? report_to_json(r, !o.no_timings).dump(2) + "\n" : report_to_text(r);
    if (o.out_file.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(o.out_file);
        if (!f) throw ConfigError("cannot write '" + o.out_file + "'");
        f << text;
    }
    if (!o.csv_dir.empty()) write_csv_dir(o.csv_dir, r);
}

void add_output_options(CLI::App* cmd, Output& o) {
    cmd->add_flag("--json", o.as_json, "print the report as JSON");
    cmd->add_flag("--no-timings", o.no_timings, "omit wall-clock timings from JSON output");
    cmd->add_option("--csv-dir", o.csv_dir, "write eigenvalue/cluster scatter CSVs here");
    cmd->add_option("-o,--output", o.out_file, "write the report to a file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral network identification from sparse node measurements"};
    app.require_subcommand(1);

    Output out;
    std::uint64_t seed_override = 0;
    bool have_seed = false;

    auto* identify = app.add_subcommand("identify", "run the identification pipeline from a JSON config");
    std::string config_path;
    identify->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    identify->add_option("--seed", seed_override, "override the master seed")->each([&](const std::string&) {
        have_seed = true;
    });
    add_output_options(identify, out);

    auto* mc = app.add_subcommand("montecarlo", "repeat the pipeline on fresh realizations");
    std::string mc_config;
    int runs = 20;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    mc->add_option("config", mc_config, "JSON config")->required()->check(CLI::ExistingFile);
    mc->add_option("--runs", runs, "number of runs")->check(CLI::PositiveNumber);
    mc->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    mc->add_flag("--json", out.as_json, "print the table as JSON");

    auto* graph = app.add_subcommand("graph", "generate or inspect graphs");
    graph->require_subcommand(1);
    auto* gen = graph->add_subcommand("gen", "generate a random graph as an edge list");
    std::string gen_kind = "erdos_renyi", weights = "constant(1)", degrees = "normal(34,28)", gen_out;
    int gen_n = 100;
    double gen_p = 0.3;
    bool undirected = false;
    std::uint64_t gen_seed = 1;
    gen->add_option("--kind", gen_kind, "erdos_renyi | degree_sequence")
        ->check(CLI::IsMember({"erdos_renyi", "degree_sequence"}));
    gen->add_option("--n", gen_n, "vertex count")->check(CLI::PositiveNumber);
    gen->add_option("--p", gen_p, "edge probability")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--weights", weights, "weight distribution, e.g. uniform(0,0.1)");
    gen->add_option("--degrees", degrees, "degree distribution for degree_sequence");
    gen->add_flag("--undirected", undirected, "symmetric edges");
    gen->add_option("--seed", gen_seed, "seed");
    gen->add_option("-o,--output", gen_out, "edge list file (stdout when absent)");

    auto* info = graph->add_subcommand("info", "degree and spectral summary of an edge list");
    std::string info_path;
    bool info_directed = false;
    info->add_option("file", info_path, "edge list")->required()->check(CLI::ExistingFile);
    info->add_flag("--directed", info_directed, "read arcs instead of edges");

    auto* dmd_cmd = app.add_subcommand("dmd", "DMD eigenvalues of a snapshot CSV");
    std::string snap_path;
    int c = 1, delta = 0;
    double rank_tol = 1e-10;
    dmd_cmd->add_option("snapshots", snap_path, "snapshot CSV")->required()->check(CLI::ExistingFile);
    dmd_cmd->add_option("--c", c, "shift count")->check(CLI::PositiveNumber);
    dmd_cmd->add_option("--delta", delta, "shift increment");
    dmd_cmd->add_option("--rank-tol", rank_tol, "relative singular value cutoff");
    dmd_cmd->add_flag("--json", out.as_json, "print JSON");

    auto* pre = app.add_subcommand("preset", "run or print a built-in experiment");
    std::string preset_name;
    bool emit = false, list = false;
    pre->add_option("name", preset_name, "preset name");
    pre->add_flag("--emit-config", emit, "print the preset config as JSON and exit");
    pre->add_flag("--list", list, "list preset names");
    pre->add_option("--seed", seed_override, "override the master seed")->each([&](const std::string&) {
        have_seed = true;
    });
    add_output_options(pre, out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*identify) {
            auto cfg = config_from_json(read_json_file(config_path));
            if (have_seed) cfg.seed = seed_override;
            emit_report(run_identification(cfg), out);
        } else if (*mc) {
            auto cfg = config_from_json(read_json_file(mc_config));
            auto table = monte_carlo(cfg, runs, workers);
            if (out.as_json) std::cout << monte_carlo_to_json(table).dump(2) << "\n";
            else std::cout << monte_carlo_to_text(table);
        } else if (*gen) {
            auto wd = Distribution::parse(weights);
            WeightedDigraph g = gen_kind == "erdos_renyi"
                                    ? gen_erdos_renyi(gen_n, gen_p, wd, !undirected, gen_seed)
                                    : gen_degree_sequence(gen_n, Distribution::parse(degrees), wd, gen_seed);
            if (gen_out.empty()) {
                write_edge_list(std::cout, g);
            } else {
                std::ofstream f(gen_out);
                if (!f) throw ConfigError("cannot write '" + gen_out + "'");
                write_edge_list(f, g);
            }
        } else if (*info) {
            std::ifstream in(info_path);
            auto g = load_edge_list(in, info_directed);
            auto d = degree_stats(g);
            int comps = 0;
            connected_components(g, &comps);
            auto mom = trace_moments(laplacian(g), 2);
            auto spec = to_vector(laplacian_spectrum(g));
            std::sort(spec.begin(), spec.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
            std::cout << "vertices " << g.n() << "\nedges " << g.edge_count() << (g.directed() ? " (arcs)" : "")
                      << "\ncomponents " << comps << "\nd_min " << d.d_min << "\nd_max " << d.d_max << "\nD1 " << d.D1
                      << "\nD2 " << d.D2 << "\nM1(L) " << mom[1] << "\nM2(L) " << mom[2] << "\n";
            if (spec.size() >= 2)
                std::cout << "lambda2 " << spec[1].real() << "\nlambda_n " << spec.back().real() << "\n";
        } else if (*dmd_cmd) {
            std::ifstream in(snap_path);
            auto snaps = read_snapshots_csv(in);
            auto D = build_data_matrix(snaps, c, delta);
            auto res = dmd(D, rank_tol);
            for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
            auto eigs = to_vector(res.continuous_eigs);
            if (out.as_json) {
                json j = {{"rank_used", res.rank_used}, {"dt", res.dt}, {"eigenvalues", json::array()}};
                for (auto z : eigs) j["eigenvalues"].push_back({z.real(), z.imag()});
                std::cout << j.dump(2) << "\n";
            } else {
                write_eigenvalues_csv(std::cout, eigs);
            }
        } else if (*pre) {
            if (list) {
                for (const auto& n : preset_names()) std::cout << n << "\n";
                return 0;
            }
            if (preset_name.empty()) throw ConfigError("preset name required (see --list)");
            auto cfg = preset(preset_name);
            if (have_seed) cfg.seed = seed_override;
            if (emit) {
                std::cout << config_to_json(cfg).dump(2) << "\n";
                return 0;
            }
            emit_report(run_identification(cfg), out);
        }
    } catch (const StageError& e) {
        std::cerr << "error in stage " << e.stage << ": " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
