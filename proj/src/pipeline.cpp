#include "specnet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "specnet/datasets.hpp"

namespace specnet {

std::string to_string(Mode m) {
    return m == Mode::exact_inversion ? "exact_inversion" : "moment_estimation";
}

Mode mode_from_string(const std::string& s) {
    if (s == "exact_inversion") return Mode::exact_inversion;
    if (s == "moment_estimation") return Mode::moment_estimation;
    throw ConfigError("unknown mode '" + s + "'");
}

void ExperimentConfig::validate() const {
    if (r < 1) throw ConfigError("r must be >= 1");
    if (K < 1) throw ConfigError("K must be >= 1");
    if (!(dt > 0)) throw ConfigError("dt must be positive");
    if (substeps < 1) throw ConfigError("substeps must be >= 1");
    if (c < 1) throw ConfigError("c must be >= 1");
    if (c > 1 && delta < 1) throw ConfigError("delta must be >= 1 when c > 1");
    if (K - (c - 1) * delta < 1) throw ConfigError("infeasible shifts: K - (c-1)*delta < 1");
    if (rank_tol < 0) throw ConfigError("rank_tol must be >= 0");
    if (graph.kind == "erdos_renyi" || graph.kind == "degree_sequence") {
        if (graph.n < 1) throw ConfigError("graph.n must be >= 1");
        if (graph.p < 0 || graph.p > 1) throw ConfigError("graph.p must be in [0,1]");
    } else if (graph.kind == "file") {
        if (graph.path.empty()) throw ConfigError("graph.path required for kind 'file'");
    } else if (graph.kind != "edges" && graph.kind != "ten_vertex" && graph.kind != "karate") {
        throw ConfigError("unknown graph kind '" + graph.kind + "'");
    }
    if (graph.pendant_distance && *graph.pendant_distance < 1) throw ConfigError("pendant_distance must be >= 1");
    if (observation.kind != "states" && observation.kind != "sine_pair" && observation.kind != "identity")
        throw ConfigError("unknown observation kind '" + observation.kind + "'");
    if (observation.kind == "states" && observation.states.empty()) throw ConfigError("no observed states");
    if (n_clusters < 0) throw ConfigError("n_clusters must be >= 0");
    if (s < 0) throw ConfigError("s must be >= 0");
    if (r_w && !(*r_w > 0)) throw ConfigError("r_w must be positive");
    if (s_w && *s_w < 0) throw ConfigError("s_w must be >= 0");
    if (mode == Mode::moment_estimation && variant == MomentVariant::two_population &&
        heterogeneity.deltaA.size() == 0)
        throw ConfigError("two_population variant needs heterogeneity.deltaA");
}

namespace {

int measured_vertex_of(const ObservationSpec& o) {
    if (o.kind == "sine_pair") return o.vertex;
    if (o.kind == "states" && !o.states.empty()) return o.states.front().first;
    return 0;
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool influenced(const WeightedDigraph& g, int v, const std::set<std::pair<int, int>>& ignore) {
    for (const auto& e : g.arcs())
        if (e.i == v && !ignore.count({e.i, e.j}) && !ignore.count({e.j, e.i})) return true;
    return false;
}

}  // namespace

WeightedDigraph build_graph(const GraphSpec& spec, std::uint64_t seed, int measured_vertex) {
    WeightedDigraph g;
    if (spec.kind == "erdos_renyi") {
        g = gen_erdos_renyi(spec.n, spec.p, spec.weights, spec.directed, seed);
    } else if (spec.kind == "degree_sequence") {
        g = gen_degree_sequence(spec.n, spec.degrees, spec.weights, seed);
    } else if (spec.kind == "file") {
        std::ifstream in(spec.path);
        if (!in) throw ConfigError("cannot open graph file '" + spec.path + "'");
        g = load_edge_list(in, spec.directed);
    } else if (spec.kind == "edges") {
        std::vector<Edge> arcs;
        for (const auto& e : spec.edges) {
            arcs.push_back(e);
            if (!spec.directed) arcs.push_back({e.j, e.i, e.w});
        }
        g = WeightedDigraph(spec.n, std::move(arcs), spec.directed);
    } else if (spec.kind == "ten_vertex") {
        g = datasets::ten_vertex();
    } else if (spec.kind == "karate") {
        g = datasets::karate_club();
    } else {
        throw ConfigError("unknown graph kind '" + spec.kind + "'");
    }

    if (spec.reweight) {
        Rng rng(derive_seed(seed, "reweight"));
        std::vector<Edge> arcs;
        for (const auto& e : g.arcs()) {
            if (!g.directed() && e.i > e.j) continue;
            double w = spec.reweight->sample(rng);
            if (w <= 0) w = std::numeric_limits<double>::min();
            arcs.push_back({e.i, e.j, w});
            if (!g.directed()) arcs.push_back({e.j, e.i, w});
        }
        g = WeightedDigraph(g.n(), std::move(arcs), g.directed());
    }
    if (spec.unweighted) g = unweight(g);

    if (spec.random_orientation) {
        Rng rng(derive_seed(seed, "orientation"));
        std::set<std::pair<int, int>> ignore(spec.influence_ignore_edges.begin(), spec.influence_ignore_edges.end());
        bool ok = false;
        WeightedDigraph oriented;
        for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
            oriented = random_orientation(g, rng);
            ok = true;
            for (int v : spec.require_influenced) {
                if (v < 0 || v >= g.n()) throw ConfigError("require_influenced vertex out of range");
                if (!influenced(oriented, v, ignore)) ok = false;
            }
        }
        if (!ok) throw ConfigError("no orientation leaves every required vertex influenced");
        g = oriented;
    }
    if (!spec.remove_edges.empty()) g = remove_edges(g, spec.remove_edges);

    if (spec.pendant_distance) {
        if (measured_vertex < 0 || measured_vertex >= g.n()) throw ConfigError("measured vertex out of range");
        auto dist = bfs_distances(g, measured_vertex);
        std::vector<int> anchors;
        for (int v = 0; v < g.n(); ++v)
            if (dist[v] == *spec.pendant_distance - 1) anchors.push_back(v);
        if (anchors.empty()) throw ConfigError("no vertex at the requested distance for the pendant vertex");
        Rng rng(derive_seed(seed, "pendant"));
        std::uniform_int_distribution<std::size_t> pick(0, anchors.size() - 1);
        double w = spec.reweight ? spec.reweight->mean() : (spec.unweighted ? 1.0 : spec.weights.mean());
        g = add_pendant_vertex(g, anchors[pick(rng)], w > 0 ? w : 1.0);
    }
    return g;
}

ObservationFunction build_observation(const ObservationSpec& spec, int n, int m) {
    if (spec.kind == "states") {
        for (auto [v, c] : spec.states)
            if (v < 0 || v >= n) throw ConfigError("observed vertex out of range");
        return select_states(spec.states, m);
    }
    if (spec.kind == "sine_pair") {
        if (spec.vertex < 0 || spec.vertex >= n) throw ConfigError("observed vertex out of range");
        return sine_pair_observation(spec.vertex, m);
    }
    if (spec.kind == "identity") return identity_observation(n * m);
    throw ConfigError("unknown observation kind '" + spec.kind + "'");
}

BuiltSystem build_system(const ExperimentConfig& cfg) {
    BuiltSystem b;
    b.measured_vertex = measured_vertex_of(cfg.observation);
    b.system.graph = build_graph(cfg.graph, derive_seed(cfg.seed, "graph"), b.measured_vertex);
    b.system.unit = cfg.unit.linear ? as_nonlinear(*cfg.unit.linear) : catalog(cfg.unit.catalog);
    b.linear = linearize(b.system.unit);
    b.system.heterogeneity = cfg.heterogeneity;
    if (cfg.heterogeneity.kind != HeterogeneityModel::Kind::none)
        b.system.deltaA = sample_heterogeneity(cfg.heterogeneity, b.system.graph.n(), b.system.unit.m,
                                               derive_seed(cfg.seed, "heterogeneity"));
    return b;
}

std::vector<Vec> draw_initial_conditions(const ExperimentConfig& cfg, const Vec& x_star, int n) {
    Rng rng(derive_seed(cfg.seed, "ics"));
    const int m = static_cast<int>(x_star.size());
    std::vector<Vec> out;
    for (int l = 0; l < cfg.r; ++l) {
        Vec X(n * m);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < m; ++i) X(k * m + i) = x_star(i) + cfg.ic_dist.sample(rng);
        out.push_back(std::move(X));
    }
    return out;
}

SpectrumMatch match_spectra(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    struct P {
        double d;
        std::size_t i, j;
    };
    std::vector<P> pairs;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) pairs.push_back({std::abs(a[i] - b[j]), i, j});
    std::stable_sort(pairs.begin(), pairs.end(), [](const P& x, const P& y) { return x.d < y.d; });
    std::vector<bool> ua(a.size()), ub(b.size());
    SpectrumMatch m;
    for (const auto& p : pairs) {
        if (ua[p.i] || ub[p.j]) continue;
        ua[p.i] = ub[p.j] = true;
        ++m.matched;
        m.max_error = std::max(m.max_error, p.d);
    }
    return m;
}

double compare_spectra(const std::vector<cplx>& a, const std::vector<cplx>& b, double overlap_tol) {
    if (a.empty() || b.empty()) throw Error("compare_spectra: empty spectrum");
    struct P {
        double d;
        std::size_t i, j;
    };
    std::vector<P> pairs;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            double d = std::abs(a[i] - b[j]);
            if (d <= overlap_tol) pairs.push_back({d, i, j});
        }
    std::stable_sort(pairs.begin(), pairs.end(), [](const P& x, const P& y) { return x.d < y.d; });
    std::vector<bool> ua(a.size()), ub(b.size());
    int matched = 0;
    for (const auto& p : pairs) {
        if (ua[p.i] || ub[p.j]) continue;
        ua[p.i] = ub[p.j] = true;
        ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(a.size() + b.size() - matched);
}

double compare_spectra(const IdentificationReport& a, const IdentificationReport& b, double overlap_tol) {
    return compare_spectra(a.laplacian_estimates, b.laplacian_estimates, overlap_tol);
}

IdentificationReport run_identification(const ExperimentConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    staged("config", [&] { cfg.validate(); return 0; });

    IdentificationReport rep;
    rep.name = cfg.name;
    rep.seed = cfg.seed;
    rep.mode = cfg.mode;

    auto t0 = std::chrono::steady_clock::now();
    BuiltSystem b = staged("build", [&] { return build_system(cfg); });
    const auto& g = b.system.graph;
    const int n = g.n(), m = b.system.unit.m;
    rep.n = n;
    rep.m = m;
    ObservationFunction f = staged("observe", [&] { return build_observation(cfg.observation, n, m); });
    rep.timings.build = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    auto trajectories = staged("simulate", [&] {
        auto X0 = draw_initial_conditions(cfg, b.system.unit.x_star, n);
        return simulate_many(b.system, X0, cfg.dt, cfg.K, cfg.substeps);
    });
    SnapshotSet snaps = staged("observe", [&] { return observe(trajectories, f); });
    trajectories.clear();
    rep.timings.simulate = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    DataMatrix D = staged("data_matrix", [&] { return build_data_matrix(snaps, cfg.c, cfg.delta); });
    DmdResult res = staged("dmd", [&] { return dmd(D, cfg.rank_tol); });
    rep.dmd_eigs = to_vector(res.continuous_eigs);
    rep.rank_used = res.rank_used;
    rep.singular_values = res.singular_values;
    for (const auto& w : res.warnings) rep.warnings.push_back("dmd: " + w);
    rep.filtered_eigs = staged("outliers", [&] { return filter_outliers(rep.dmd_eigs, cfg.outliers, cfg.dt); });
    rep.timings.dmd = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    if (cfg.mode == Mode::exact_inversion) {
        staged("inversion", [&] {
            RecoveryOptions opt;
            opt.group_tol = cfg.group_tol;
            opt.sigmaA_tol = cfg.sigmaA_tol;
            opt.project_real = !g.directed();
            rep.recovered = recover_spectrum(rep.filtered_eigs, b.linear, opt);
            for (const auto& w : rep.recovered->warnings) rep.warnings.push_back("inversion: " + w);
            for (const auto& grp : rep.recovered->aggregated) rep.laplacian_estimates.push_back(grp.lambda_bar);
            if (rep.laplacian_estimates.size() >= 2) {
                rep.lambda2_est = rep.laplacian_estimates[1].real();
                rep.lambda_n_est = rep.laplacian_estimates.back().real();
                if (n >= 2) rep.degree_bounds = degree_bounds_from_spectrum(*rep.lambda2_est, *rep.lambda_n_est, n);
            }
            return 0;
        });
    } else {
        staged("moments", [&] {
            if (rep.filtered_eigs.empty()) throw DegenerateError("no eigenvalues left after outlier removal");
            int nc = cfg.n_clusters > 0 ? cfg.n_clusters : m;
            nc = std::min<int>(nc, static_cast<int>(rep.filtered_eigs.size()));
            rep.clusters = cluster_eigenvalues(rep.filtered_eigs, nc, derive_seed(cfg.seed, "kmeans"), cfg.clustering);
            auto [m1k, m2k] = moments_of_K(rep.clusters);
            MomentEstimates est;
            est.M1K = m1k;
            est.M2K = m2k;
            est.variant = cfg.variant;
            std::pair<double, double> ml;
            switch (cfg.variant) {
                case MomentVariant::identical: ml = laplacian_moments_identical(m1k, m2k, b.linear); break;
                case MomentVariant::hetero_known_A: ml = laplacian_moments_hetero(m1k, m2k, b.linear, cfg.s); break;
                case MomentVariant::hetero_unknown_A: {
                    Mat Am;
                    if (cfg.A_measured) {
                        Am = *cfg.A_measured;
                    } else {
                        HeterogeneityModel one;
                        one.kind = HeterogeneityModel::Kind::iid_block;
                        one.s = cfg.s;
                        Am = b.linear.A + sample_heterogeneity(one, 1, m, derive_seed(cfg.seed, "measured_A"))[0];
                    }
                    ml = laplacian_moments_hetero_unknown_A(m1k, m2k, Am, b.linear);
                    break;
                }
                case MomentVariant::two_population: {
                    double s_eff = cfg.heterogeneity.kind == HeterogeneityModel::Kind::two_population ? 1.0 : cfg.s;
                    ml = laplacian_moments_two_population(m1k, m2k, b.linear, cfg.heterogeneity.deltaA, s_eff);
                    break;
                }
            }
            est.M1L = ml.first;
            est.M2L = ml.second;
            est.degree_report = degree_stats_from_moments(est.M1L, est.M2L);
            if (cfg.r_w) {
                est.unweighted = unweighted_moments(est.M1L, est.M2L, *cfg.r_w, cfg.s_w.value_or(0.0));
                est.unweighted_degree_report = degree_stats_from_moments(est.unweighted->first, est.unweighted->second);
            }
            rep.moments = est;
            return 0;
        });
    }
    rep.timings.identify = seconds_since(t0);

    staged("truth", [&] {
        GroundTruth t;
        t.spectrum = to_vector(laplacian_spectrum(g));
        std::sort(t.spectrum.begin(), t.spectrum.end(), [](cplx x, cplx y) {
            return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
        });
        if (t.spectrum.size() >= 2) {
            t.lambda2 = t.spectrum[1].real();
            t.lambda_n = t.spectrum.back().real();
        }
        if (n > 0) {
            auto mom = trace_moments(laplacian(g), 2);
            t.M1L = mom[1];
            t.M2L = mom[2];
        }
        t.degrees = degree_stats(g);
        if (cfg.r_w && n > 0) {
            auto gu = unweight(g);
            auto mom = trace_moments(laplacian(gu), 2);
            t.M1Lbar = mom[1];
            t.M2Lbar = mom[2];
            t.unweighted_degrees = degree_stats(gu);
        }
        if (cfg.mode == Mode::exact_inversion && !rep.laplacian_estimates.empty()) {
            auto mt = match_spectra(rep.laplacian_estimates, t.spectrum);
            rep.spectrum_matched = mt.matched;
            rep.spectrum_max_error = mt.max_error;
        }
        rep.truth = std::move(t);
        return 0;
    });
    rep.timings.total = seconds_since(t_start);
    return rep;
}

MonteCarloTable monte_carlo(const ExperimentConfig& cfg, int n_runs, int workers) {
    if (cfg.graph.kind != "erdos_renyi" && cfg.graph.kind != "degree_sequence" && !cfg.graph.random_orientation &&
        cfg.heterogeneity.kind == HeterogeneityModel::Kind::none && !cfg.graph.reweight)
        throw ConfigError("monte_carlo needs a random graph, weights or heterogeneity to vary");
    if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
    workers = std::max(1, workers);

    struct Outcome {
        bool ok = false;
        std::string error;
        std::map<std::string, std::pair<double, double>> values;  // estimate, truth
    };
    std::vector<Outcome> outcomes(n_runs);
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < n_runs; i = next++) {
            ExperimentConfig c = cfg;
            c.seed = derive_seed(cfg.seed, "run", static_cast<std::uint64_t>(i));
            Outcome& o = outcomes[i];
            try {
                auto rep = run_identification(c);
                const auto& t = *rep.truth;
                if (rep.mode == Mode::exact_inversion) {
                    if (rep.lambda2_est && t.lambda2) o.values["lambda2"] = {*rep.lambda2_est, *t.lambda2};
                    if (rep.lambda_n_est && t.lambda_n) o.values["lambda_n"] = {*rep.lambda_n_est, *t.lambda_n};
                    if (rep.degree_bounds) {
                        o.values["d_min_bound"] = {rep.degree_bounds->first, t.degrees.d_min};
                        o.values["d_max_bound"] = {rep.degree_bounds->second, t.degrees.d_max};
                    }
                    if (rep.spectrum_max_error) o.values["spectrum_max_error"] = {*rep.spectrum_max_error, 0.0};
                } else {
                    o.values["M1L"] = {rep.moments->M1L, t.M1L};
                    o.values["M2L"] = {rep.moments->M2L, t.M2L};
                    if (rep.moments->unweighted && t.M1Lbar) {
                        o.values["M1Lbar"] = {rep.moments->unweighted->first, *t.M1Lbar};
                        o.values["M2Lbar"] = {rep.moments->unweighted->second, *t.M2Lbar};
                    }
                }
                o.ok = true;
            } catch (const std::exception& e) {
                o.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    MonteCarloTable table;
    table.runs = n_runs;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            ++table.failures;
            table.failure_messages.push_back(o.error);
            continue;
        }
        for (const auto& [k, v] : o.values) series[k].push_back(v);
    }
    for (const auto& [k, vals] : series) {
        ErrorStats s;
        int nrel = 0;
        double sa = 0, sr = 0, sa2 = 0, sr2 = 0;
        for (auto [est, tru] : vals) {
            double ea = std::abs(est - tru);
            sa += ea;
            sa2 += ea * ea;
            if (tru != 0.0) {
                double er = ea / std::abs(tru);
                sr += er;
                sr2 += er * er;
                ++nrel;
            }
        }
        s.count = static_cast<int>(vals.size());
        s.mean_abs = sa / s.count;
        s.rmse_abs = std::sqrt(sa2 / s.count);
        if (nrel > 0) {
            s.mean_rel = sr / nrel;
            s.rmse_rel = std::sqrt(sr2 / nrel);
        } else {
            s.mean_rel = s.rmse_rel = std::nan("");
        }
        table.stats[k] = s;
    }
    return table;
}

// ---- presets ----

std::vector<std::string> preset_names() {
    return {"example1", "example2", "example3", "example4", "example5", "degmin_max", "degmin_max_added_vertex",
            "celegans", "karate", "karate_cut"};
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    auto er100 = [&](bool directed, const Distribution& w) {
        c.graph.kind = "erdos_renyi";
        c.graph.n = 100;
        c.graph.p = 0.3;
        c.graph.directed = directed;
        c.graph.weights = w;
    };
    if (name == "example1") {
        c.graph.kind = "ten_vertex";
        c.unit.catalog = "example1";
        c.ic_dist = Distribution::normal(0, 1);
        c.r = 10, c.K = 50, c.dt = 0.4, c.c = 2, c.delta = 5;
        c.observation.states = {{0, 0}};
        c.mode = Mode::exact_inversion;
        c.rank_tol = 0.0;
    } else if (name == "example2") {
        c.graph.kind = "ten_vertex";
        c.unit.catalog = "example2";
        c.ic_dist = Distribution::uniform(-0.5, 0.5);
        c.r = 10, c.K = 50, c.dt = 0.8, c.c = 3, c.delta = 5;
        c.observation.kind = "sine_pair";
        c.observation.vertex = 0;
        c.mode = Mode::exact_inversion;
    } else if (name == "example3" || name == "example4" || name == "example5") {
        er100(true, Distribution::uniform(0.0, 0.1));
        c.unit.catalog = "example1";
        c.ic_dist = Distribution::normal(0, 1);
        c.r = 10, c.K = 50, c.dt = 0.4, c.c = 2, c.delta = 5;
        c.observation.states = {{0, 0}};
        c.mode = Mode::moment_estimation;
        c.clustering.trim = true;
        if (name == "example4") {
            c.dt = 0.2;
            c.heterogeneity.kind = HeterogeneityModel::Kind::iid_block;
            c.heterogeneity.s = 0.2;
            c.variant = MomentVariant::hetero_known_A;
            c.s = 0.2;
        }
        if (name == "example5") {
            c.r_w = 0.05;
            c.s_w = 0.1 / std::sqrt(12.0);
        }
    } else if (name == "degmin_max" || name == "degmin_max_added_vertex") {
        er100(false, Distribution::constant(1.0));
        c.graph.unweighted = true;
        c.unit.catalog = "cubic";
        c.ic_dist = Distribution::uniform(-0.5, 0.5);
        c.c = 2, c.delta = 5;
        c.observation.states = {{0, 0}};
        c.mode = Mode::exact_inversion;
        if (name == "degmin_max") {
            c.r = 5, c.K = 50, c.dt = 1.0;
        } else {
            c.r = 10, c.K = 40, c.dt = 0.6;
            c.graph.pendant_distance = 3;
        }
    } else if (name == "celegans") {
        // edge list supplied by the user, 0-based, 297 vertices
        c.graph.kind = "file";
        c.graph.path = "data/celegans.txt";
        c.graph.directed = false;
        c.graph.reweight = Distribution::uniform(0.0, 0.02);
        c.unit.catalog = "fitzhugh_nagumo";
        c.heterogeneity.kind = HeterogeneityModel::Kind::iid_block;
        c.heterogeneity.s = std::sqrt(0.1);
        c.variant = MomentVariant::hetero_known_A;
        c.s = std::sqrt(0.1);
        c.r_w = 0.01;
        c.s_w = 0.02 / std::sqrt(12.0);
        c.ic_dist = Distribution::uniform(-0.5, 0.5);
        c.r = 10, c.K = 75, c.dt = 0.2, c.c = 2, c.delta = 5;
        c.observation.states = {{53, 0}};
        c.mode = Mode::moment_estimation;
        c.clustering.trim = true;
    } else if (name == "karate" || name == "karate_cut") {
        c.graph.kind = "karate";
        c.graph.directed = false;
        c.graph.random_orientation = true;
        c.graph.require_influenced = {11, 29};
        c.graph.influence_ignore_edges = datasets::karate_cut_edges();
        if (name == "karate_cut") c.graph.remove_edges = datasets::karate_cut_edges();
        c.unit.catalog = "consensus_tanh";
        c.ic_dist = Distribution::uniform(-1.0, 1.0);
        c.r = 20, c.K = 100, c.dt = 1.0, c.c = 2, c.delta = 5;
        c.observation.states = {{11, 0}};
        c.mode = Mode::exact_inversion;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return c;
}

// ---- JSON ----

namespace {

using nlohmann::json;

json mat_to_json(const Mat& M) {
    json j = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        j.push_back(row);
    }
    return j;
}

Mat mat_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a nonempty array of rows");
    Mat M(j.size(), j[0].size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != j[0].size()) throw ConfigError("ragged matrix");
        for (std::size_t k = 0; k < j[i].size(); ++k) M(i, k) = j[i][k].get<double>();
    }
    return M;
}

json vec_to_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vec vec_from_json(const json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<Vec>(v.data(), v.size());
}

json cplx_list(const std::vector<cplx>& v) {
    json j = json::array();
    for (auto z : v) j.push_back({z.real(), z.imag()});
    return j;
}

json pairs_to_json(const std::vector<std::pair<int, int>>& v) {
    json j = json::array();
    for (auto [a, b] : v) j.push_back({a, b});
    return j;
}

std::vector<std::pair<int, int>> pairs_from_json(const json& j) {
    std::vector<std::pair<int, int>> v;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("expected [a, b] pair");
        v.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    return v;
}

json num_or_null(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

double num_or_nan(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

template <class T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

json degree_report_json(const DegreeMomentReport& d) {
    return {{"D1", d.D1}, {"D2_lo", d.D2_lo}, {"D2_hi", d.D2_hi}, {"consistent", d.consistent}};
}

json degree_stats_json(const DegreeStats& d) {
    return {{"d_min", d.d_min}, {"d_max", d.d_max}, {"D1", d.D1}, {"D2", d.D2}};
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
    json g = {{"kind", c.graph.kind},
              {"n", c.graph.n},
              {"p", c.graph.p},
              {"directed", c.graph.directed},
              {"weights", c.graph.weights.describe()},
              {"degrees", c.graph.degrees.describe()},
              {"unweighted", c.graph.unweighted},
              {"random_orientation", c.graph.random_orientation},
              {"require_influenced", c.graph.require_influenced},
              {"influence_ignore_edges", pairs_to_json(c.graph.influence_ignore_edges)},
              {"remove_edges", pairs_to_json(c.graph.remove_edges)}};
    if (!c.graph.path.empty()) g["path"] = c.graph.path;
    if (!c.graph.edges.empty()) {
        json e = json::array();
        for (const auto& x : c.graph.edges) e.push_back({x.i, x.j, x.w});
        g["edges"] = e;
    }
    if (c.graph.reweight) g["reweight"] = c.graph.reweight->describe();
    if (c.graph.pendant_distance) g["pendant_distance"] = *c.graph.pendant_distance;

    json unit = {{"catalog", c.unit.catalog}};
    if (c.unit.linear)
        unit["linear"] = {{"A", mat_to_json(c.unit.linear->A)},
                          {"B", vec_to_json(c.unit.linear->B)},
                          {"C", vec_to_json(c.unit.linear->C)}};

    json het = {{"kind", to_string(c.heterogeneity.kind)}, {"s", c.heterogeneity.s}};
    if (c.heterogeneity.entry_dist) het["entry_dist"] = c.heterogeneity.entry_dist->describe();
    if (c.heterogeneity.eps_dist) het["eps_dist"] = c.heterogeneity.eps_dist->describe();
    if (c.heterogeneity.deltaA.size() > 0) het["deltaA"] = mat_to_json(c.heterogeneity.deltaA);

    json obs = {{"kind", c.observation.kind}, {"states", pairs_to_json(c.observation.states)},
                {"vertex", c.observation.vertex}};

    json j = {{"name", c.name},
              {"seed", c.seed},
              {"graph", g},
              {"unit", unit},
              {"heterogeneity", het},
              {"ic_dist", c.ic_dist.describe()},
              {"r", c.r},
              {"K", c.K},
              {"dt", c.dt},
              {"substeps", c.substeps},
              {"c", c.c},
              {"delta", c.delta},
              {"observation", obs},
              {"mode", to_string(c.mode)},
              {"rank_tol", c.rank_tol},
              {"outliers",
               {{"re_max", c.outliers.re_max}, {"re_min", c.outliers.re_min}, {"im_max", num_or_null(c.outliers.im_max)}}},
              {"group_tol", num_or_null(c.group_tol)},
              {"sigmaA_tol", c.sigmaA_tol},
              {"n_clusters", c.n_clusters},
              {"clustering",
               {{"restarts", c.clustering.restarts},
                {"merge", c.clustering.merge},
                {"trim", c.clustering.trim},
                {"trim_factor", c.clustering.trim_factor}}},
              {"variant", to_string(c.variant)},
              {"s", c.s}};
    if (c.A_measured) j["A_measured"] = mat_to_json(*c.A_measured);
    if (c.r_w) j["r_w"] = *c.r_w;
    if (c.s_w) j["s_w"] = *c.s_w;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    try {
        ExperimentConfig c;
        if (j.contains("preset")) c = preset(j.at("preset").get<std::string>());
        take(j, "name", c.name);
        take(j, "seed", c.seed);
        if (j.contains("graph")) {
            const auto& g = j.at("graph");
            take(g, "kind", c.graph.kind);
            take(g, "n", c.graph.n);
            take(g, "p", c.graph.p);
            take(g, "directed", c.graph.directed);
            if (g.contains("weights")) c.graph.weights = Distribution::parse(g.at("weights").get<std::string>());
            if (g.contains("degrees")) c.graph.degrees = Distribution::parse(g.at("degrees").get<std::string>());
            take(g, "path", c.graph.path);
            if (g.contains("edges")) {
                c.graph.edges.clear();
                for (const auto& e : g.at("edges")) {
                    if (!e.is_array() || e.size() < 2 || e.size() > 3) throw ConfigError("edge must be [i, j] or [i, j, w]");
                    c.graph.edges.push_back({e[0].get<int>(), e[1].get<int>(), e.size() == 3 ? e[2].get<double>() : 1.0});
                }
            }
            if (g.contains("reweight")) {
                if (g.at("reweight").is_null()) c.graph.reweight.reset();
                else c.graph.reweight = Distribution::parse(g.at("reweight").get<std::string>());
            }
            take(g, "unweighted", c.graph.unweighted);
            take(g, "random_orientation", c.graph.random_orientation);
            take(g, "require_influenced", c.graph.require_influenced);
            if (g.contains("influence_ignore_edges"))
                c.graph.influence_ignore_edges = pairs_from_json(g.at("influence_ignore_edges"));
            if (g.contains("remove_edges")) c.graph.remove_edges = pairs_from_json(g.at("remove_edges"));
            if (g.contains("pendant_distance")) {
                if (g.at("pendant_distance").is_null()) c.graph.pendant_distance.reset();
                else c.graph.pendant_distance = g.at("pendant_distance").get<int>();
            }
        }
        if (j.contains("unit")) {
            const auto& u = j.at("unit");
            take(u, "catalog", c.unit.catalog);
            if (u.contains("linear")) {
                const auto& l = u.at("linear");
                LinearUnit lu{mat_from_json(l.at("A")), vec_from_json(l.at("B")), vec_from_json(l.at("C"))};
                lu.validate();
                c.unit.linear = lu;
            }
        }
        if (j.contains("heterogeneity")) {
            const auto& h = j.at("heterogeneity");
            if (h.contains("kind")) c.heterogeneity.kind = heterogeneity_kind_from_string(h.at("kind").get<std::string>());
            take(h, "s", c.heterogeneity.s);
            if (h.contains("entry_dist"))
                c.heterogeneity.entry_dist = Distribution::parse(h.at("entry_dist").get<std::string>());
            if (h.contains("eps_dist")) c.heterogeneity.eps_dist = Distribution::parse(h.at("eps_dist").get<std::string>());
            if (h.contains("deltaA")) c.heterogeneity.deltaA = mat_from_json(h.at("deltaA"));
        }
        if (j.contains("ic_dist")) c.ic_dist = Distribution::parse(j.at("ic_dist").get<std::string>());
        take(j, "r", c.r);
        take(j, "K", c.K);
        take(j, "dt", c.dt);
        take(j, "substeps", c.substeps);
        take(j, "c", c.c);
        take(j, "delta", c.delta);
        if (j.contains("observation")) {
            const auto& o = j.at("observation");
            take(o, "kind", c.observation.kind);
            if (o.contains("states")) c.observation.states = pairs_from_json(o.at("states"));
            take(o, "vertex", c.observation.vertex);
        }
        if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
        take(j, "rank_tol", c.rank_tol);
        if (j.contains("outliers")) {
            const auto& o = j.at("outliers");
            take(o, "re_max", c.outliers.re_max);
            take(o, "re_min", c.outliers.re_min);
            if (o.contains("im_max")) c.outliers.im_max = num_or_nan(o.at("im_max"));
        }
        if (j.contains("group_tol")) c.group_tol = num_or_nan(j.at("group_tol"));
        take(j, "sigmaA_tol", c.sigmaA_tol);
        take(j, "n_clusters", c.n_clusters);
        if (j.contains("clustering")) {
            const auto& k = j.at("clustering");
            take(k, "restarts", c.clustering.restarts);
            take(k, "merge", c.clustering.merge);
            take(k, "trim", c.clustering.trim);
            take(k, "trim_factor", c.clustering.trim_factor);
        }
        if (j.contains("variant")) c.variant = moment_variant_from_string(j.at("variant").get<std::string>());
        take(j, "s", c.s);
        if (j.contains("A_measured")) c.A_measured = mat_from_json(j.at("A_measured"));
        if (j.contains("r_w")) c.r_w = j.at("r_w").get<double>();
        if (j.contains("s_w")) c.s_w = j.at("s_w").get<double>();
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

json report_to_json(const IdentificationReport& r, bool include_timings) {
    json j = {{"name", r.name},
              {"seed", r.seed},
              {"mode", to_string(r.mode)},
              {"n", r.n},
              {"m", r.m},
              {"rank_used", r.rank_used},
              {"singular_values", vec_to_json(r.singular_values)},
              {"dmd_eigs", cplx_list(r.dmd_eigs)},
              {"filtered_eigs", cplx_list(r.filtered_eigs)},
              {"laplacian_estimates", cplx_list(r.laplacian_estimates)},
              {"warnings", r.warnings}};
    if (r.recovered) {
        json raw = json::array();
        for (const auto& e : r.recovered->raw)
            raw.push_back({{"mu", {e.mu.real(), e.mu.imag()}},
                           {"lambda", {num_or_null(e.lambda.real()), num_or_null(e.lambda.imag())}},
                           {"delta", {e.delta.real(), e.delta.imag()}},
                           {"degenerate", e.degenerate}});
        json groups = json::array();
        for (const auto& g : r.recovered->aggregated)
            groups.push_back({{"lambda_bar", {g.lambda_bar.real(), g.lambda_bar.imag()}}, {"members", g.members}});
        j["recovered"] = {{"raw", raw}, {"aggregated", groups}, {"group_tol", r.recovered->group_tol}};
    }
    if (r.lambda2_est) j["lambda2_est"] = *r.lambda2_est;
    if (r.lambda_n_est) j["lambda_n_est"] = *r.lambda_n_est;
    if (r.degree_bounds) j["degree_bounds"] = {{"d_min_lower", r.degree_bounds->first}, {"d_max_upper", r.degree_bounds->second}};
    if (!r.clusters.empty()) {
        json cl = json::array();
        for (const auto& c : r.clusters)
            cl.push_back({{"size", c.members.size()},
                          {"centroid", {c.centroid.real(), c.centroid.imag()}},
                          {"hull", cplx_list(c.hull)},
                          {"area", c.area_moments.A},
                          {"Ix", c.area_moments.Ix},
                          {"Ixx", c.area_moments.Ixx},
                          {"Iyy", c.area_moments.Iyy}});
        j["clusters"] = cl;
    }
    if (r.moments) {
        const auto& m = *r.moments;
        json mj = {{"M1K", m.M1K}, {"M2K", m.M2K}, {"M1L", m.M1L}, {"M2L", m.M2L},
                   {"variant", to_string(m.variant)}, {"degrees", degree_report_json(m.degree_report)}};
        if (m.unweighted) {
            mj["M1Lbar"] = m.unweighted->first;
            mj["M2Lbar"] = m.unweighted->second;
            mj["unweighted_degrees"] = degree_report_json(*m.unweighted_degree_report);
        }
        j["moments"] = mj;
    }
    if (r.truth) {
        const auto& t = *r.truth;
        json tj = {{"spectrum", cplx_list(t.spectrum)}, {"M1L", t.M1L}, {"M2L", t.M2L},
                   {"degrees", degree_stats_json(t.degrees)}};
        if (t.lambda2) tj["lambda2"] = *t.lambda2;
        if (t.lambda_n) tj["lambda_n"] = *t.lambda_n;
        if (t.M1Lbar) tj["M1Lbar"] = *t.M1Lbar;
        if (t.M2Lbar) tj["M2Lbar"] = *t.M2Lbar;
        if (t.unweighted_degrees) tj["unweighted_degrees"] = degree_stats_json(*t.unweighted_degrees);
        j["truth"] = tj;
    }
    if (r.spectrum_max_error) {
        j["spectrum_max_error"] = *r.spectrum_max_error;
        j["spectrum_matched"] = r.spectrum_matched;
    }
    if (include_timings)
        j["timings"] = {{"build", r.timings.build},
                        {"simulate", r.timings.simulate},
                        {"dmd", r.timings.dmd},
                        {"identify", r.timings.identify},
                        {"total", r.timings.total}};
    return j;
}

json monte_carlo_to_json(const MonteCarloTable& t) {
    json s = json::object();
    for (const auto& [k, v] : t.stats)
        s[k] = {{"count", v.count},
                {"mean_abs", v.mean_abs},
                {"mean_rel", num_or_null(v.mean_rel)},
                {"rmse_abs", v.rmse_abs},
                {"rmse_rel", num_or_null(v.rmse_rel)}};
    return {{"runs", t.runs}, {"failures", t.failures}, {"failure_messages", t.failure_messages}, {"stats", s}};
}

namespace {

std::string fmt_c(cplx z) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(5) << z.real();
    if (z.imag() != 0.0) os << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return os.str();
}

}  // namespace

std::string report_to_text(const IdentificationReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(5);
    os << "experiment " << r.name << "  seed " << r.seed << "  mode " << to_string(r.mode) << "\n";
    os << "network n=" << r.n << " m=" << r.m << "  DMD rank " << r.rank_used << ", " << r.dmd_eigs.size()
       << " eigenvalues, " << r.filtered_eigs.size() << " after outlier removal\n";
    if (r.mode == Mode::exact_inversion) {
        os << "\n  #  recovered lambda" << std::string(14, ' ') << "true lambda\n";
        std::vector<cplx> truth = r.truth ? r.truth->spectrum : std::vector<cplx>{};
        std::size_t rows = std::max(r.laplacian_estimates.size(), truth.size());
        for (std::size_t i = 0; i < rows; ++i) {
            std::string a = i < r.laplacian_estimates.size() ? fmt_c(r.laplacian_estimates[i]) : "";
            std::string b = i < truth.size() ? fmt_c(truth[i]) : "";
            os << std::setw(3) << i << "  " << std::left << std::setw(30) << a << b << std::right << "\n";
        }
        if (r.lambda2_est) os << "\nlambda2 estimate " << *r.lambda2_est;
        if (r.truth && r.truth->lambda2) os << "   (true " << *r.truth->lambda2 << ")";
        if (r.lambda2_est) os << "\n";
        if (r.degree_bounds) {
            os << "d_min >= " << r.degree_bounds->first << "   d_max <= " << r.degree_bounds->second;
            if (r.truth) os << "   (true " << r.truth->degrees.d_min << ", " << r.truth->degrees.d_max << ")";
            os << "\n";
        }
        if (r.spectrum_max_error)
            os << "max matched error " << std::scientific << std::setprecision(3) << *r.spectrum_max_error
               << std::fixed << std::setprecision(5) << " over " << r.spectrum_matched << " pairs\n";
    } else if (r.moments) {
        const auto& m = *r.moments;
        os << "\nclusters " << r.clusters.size() << "   variant " << to_string(m.variant) << "\n";
        os << std::setw(12) << "" << std::setw(14) << "estimate" << std::setw(14) << "exact" << "\n";
        auto row = [&](const char* k, double est, std::optional<double> tru) {
            os << std::setw(12) << std::left << k << std::right << std::setw(14) << est;
            if (tru) os << std::setw(14) << *tru;
            os << "\n";
        };
        row("M1(K)", m.M1K, std::nullopt);
        row("M2(K)", m.M2K, std::nullopt);
        row("M1(L)", m.M1L, r.truth ? std::optional<double>(r.truth->M1L) : std::nullopt);
        row("M2(L)", m.M2L, r.truth ? std::optional<double>(r.truth->M2L) : std::nullopt);
        os << "D1 = " << m.degree_report.D1 << "   D2 in [" << m.degree_report.D2_lo << ", " << m.degree_report.D2_hi
           << "]" << (m.degree_report.consistent ? "" : "  (inconsistent moments)") << "\n";
        if (m.unweighted) {
            row("M1(Lbar)", m.unweighted->first, r.truth ? r.truth->M1Lbar : std::nullopt);
            row("M2(Lbar)", m.unweighted->second, r.truth ? r.truth->M2Lbar : std::nullopt);
            const auto& u = *m.unweighted_degree_report;
            os << "unweighted D1 = " << u.D1 << "   D2 in [" << u.D2_lo << ", " << u.D2_hi << "]\n";
        }
    }
    for (const auto& w : r.warnings) os << "warning: " << w << "\n";
    os << std::setprecision(3) << "time " << r.timings.total << " s\n";
    return os.str();
}

std::string monte_carlo_to_text(const MonteCarloTable& t) {
    std::ostringstream os;
    os << "runs " << t.runs << "  failures " << t.failures << "\n";
    os << std::left << std::setw(20) << "quantity" << std::right << std::setw(8) << "n" << std::setw(14) << "mean abs"
       << std::setw(14) << "mean rel" << std::setw(14) << "rmse abs" << std::setw(14) << "rmse rel" << "\n";
    os << std::setprecision(5) << std::fixed;
    for (const auto& [k, v] : t.stats)
        os << std::left << std::setw(20) << k << std::right << std::setw(8) << v.count << std::setw(14) << v.mean_abs
           << std::setw(14) << v.mean_rel << std::setw(14) << v.rmse_abs << std::setw(14) << v.rmse_rel << "\n";
    for (const auto& m : t.failure_messages) os << "failure: " << m << "\n";
    return os.str();
}

void write_eigenvalues_csv(std::ostream& out, const std::vector<cplx>& eigs) {
    out.precision(17);
    out << "re,im\n";
    for (auto z : eigs) out << z.real() << "," << z.imag() << "\n";
}

void write_recovered_csv(std::ostream& out, const RecoveredSpectrum& rs) {
    out.precision(17);
    out << "re_lambda,im_lambda,weight,group\n";
    for (std::size_t g = 0; g < rs.aggregated.size(); ++g)
        for (int i : rs.aggregated[g].members) {
            const auto& e = rs.raw[i];
            double d2 = std::norm(e.delta);
            out << e.lambda.real() << "," << e.lambda.imag() << "," << (d2 > 1e-300 ? 1.0 / d2 : 1e300) << "," << g
                << "\n";
        }
}

void write_clusters_csv(std::ostream& out, const std::vector<EigenvalueCluster>& clusters) {
    out.precision(17);
    out << "cluster,kind,re,im\n";
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (auto z : clusters[c].members) out << c << ",member," << z.real() << "," << z.imag() << "\n";
        for (auto z : clusters[c].hull) out << c << ",hull," << z.real() << "," << z.imag() << "\n";
    }
}

}  // namespace specnet
