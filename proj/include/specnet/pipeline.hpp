#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "specnet/dmd.hpp"
#include "specnet/dynamics.hpp"
#include "specnet/graph.hpp"
#include "specnet/inversion.hpp"
#include "specnet/moments.hpp"
#include "specnet/observation.hpp"

namespace specnet {

struct GraphSpec {
    // erdos_renyi | degree_sequence | file | edges | ten_vertex | karate
    std::string kind = "erdos_renyi";
    int n = 100;
    double p = 0.3;
    bool directed = true;
    Distribution weights = Distribution::constant(1.0);
    Distribution degrees = Distribution::normal(34, 28);
    std::string path;         // kind == file
    std::vector<Edge> edges;  // kind == edges, taken as arcs when directed
    std::optional<Distribution> reweight;  // redraw every edge weight
    bool unweighted = false;
    std::vector<std::pair<int, int>> remove_edges;
    // orient every undirected edge at random; redraw until each vertex in
    // require_influenced has an out-arc outside influence_ignore_edges
    bool random_orientation = false;
    std::vector<int> require_influenced;
    std::vector<std::pair<int, int>> influence_ignore_edges;
    // attach a degree-1 vertex at this hop distance from the measured vertex
    std::optional<int> pendant_distance;
};

struct UnitSpec {
    std::string catalog = "example1";
    std::optional<LinearUnit> linear;  // overrides catalog when set
};

struct ObservationSpec {
    std::string kind = "states";  // states | sine_pair | identity
    std::vector<std::pair<int, int>> states{{0, 0}};
    int vertex = 0;  // sine_pair
};

enum class Mode { exact_inversion, moment_estimation };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct ExperimentConfig {
    std::string name = "custom";
    GraphSpec graph;
    UnitSpec unit;
    HeterogeneityModel heterogeneity;
    Distribution ic_dist = Distribution::normal(0, 1);
    int r = 10;
    int K = 50;
    double dt = 0.4;
    int substeps = 10;
    int c = 2;
    int delta = 5;
    ObservationSpec observation;
    Mode mode = Mode::exact_inversion;
    double rank_tol = 1e-10;
    OutlierPolicy outliers;
    // exact inversion
    double group_tol = std::numeric_limits<double>::quiet_NaN();
    double sigmaA_tol = 1e-6;
    // moment estimation
    int n_clusters = 0;  // 0 means m
    ClusterOptions clustering;
    MomentVariant variant = MomentVariant::identical;
    double s = 0.0;                   // dynamics std dev for the corrections
    std::optional<Mat> A_measured;    // hetero_unknown_A; drawn as A + dA when absent
    std::optional<double> r_w, s_w;   // weight mean / std for the unweighted moments
    std::uint64_t seed = 1;

    void validate() const;
};

struct Timings {
    double build = 0, simulate = 0, dmd = 0, identify = 0, total = 0;
};

struct GroundTruth {
    std::vector<cplx> spectrum;
    double M1L = 0, M2L = 0;
    DegreeStats degrees;
    std::optional<double> M1Lbar, M2Lbar;  // unweighted graph
    std::optional<DegreeStats> unweighted_degrees;
    std::optional<double> lambda2, lambda_n;  // real parts, ascending order
};

struct IdentificationReport {
    std::string name;
    std::uint64_t seed = 0;
    Mode mode = Mode::exact_inversion;
    int n = 0, m = 0;
    std::vector<cplx> dmd_eigs;
    std::vector<cplx> filtered_eigs;
    int rank_used = 0;
    Vec singular_values;
    std::optional<RecoveredSpectrum> recovered;
    std::vector<cplx> laplacian_estimates;  // aggregated lambda-bar, ascending real part
    std::optional<double> lambda2_est, lambda_n_est;
    std::optional<std::pair<double, double>> degree_bounds;  // (d_min lower, d_max upper)
    std::vector<EigenvalueCluster> clusters;
    std::optional<MomentEstimates> moments;
    std::optional<GroundTruth> truth;
    std::optional<double> spectrum_max_error;  // over matched pairs
    int spectrum_matched = 0;
    std::vector<std::string> warnings;
    Timings timings;
};

struct BuiltSystem {
    NetworkSystem system;
    LinearUnit linear;
    int measured_vertex = 0;
};

// graph, unit, heterogeneity realization
BuiltSystem build_system(const ExperimentConfig& cfg);
WeightedDigraph build_graph(const GraphSpec& spec, std::uint64_t seed, int measured_vertex);
ObservationFunction build_observation(const ObservationSpec& spec, int n, int m);
std::vector<Vec> draw_initial_conditions(const ExperimentConfig& cfg, const Vec& x_star, int n);

IdentificationReport run_identification(const ExperimentConfig& cfg);

struct ErrorStats {
    int count = 0;
    double mean_abs = 0, mean_rel = 0, rmse_abs = 0, rmse_rel = 0;
};

struct MonteCarloTable {
    int runs = 0;
    int failures = 0;
    std::vector<std::string> failure_messages;
    std::map<std::string, ErrorStats> stats;
};

MonteCarloTable monte_carlo(const ExperimentConfig& cfg, int n_runs, int workers = 1);

ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// greedy matching within overlap_tol; matched / (|a| + |b| - matched)
double compare_spectra(const std::vector<cplx>& a, const std::vector<cplx>& b, double overlap_tol = 0.1);
double compare_spectra(const IdentificationReport& a, const IdentificationReport& b, double overlap_tol = 0.1);

struct SpectrumMatch {
    int matched = 0;
    double max_error = 0;
};
// pairs closest-first without reuse; max_error over all min(|a|,|b|) pairs
SpectrumMatch match_spectra(const std::vector<cplx>& a, const std::vector<cplx>& b);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const IdentificationReport& r, bool include_timings = true);
nlohmann::json monte_carlo_to_json(const MonteCarloTable& t);
std::string report_to_text(const IdentificationReport& r);
std::string monte_carlo_to_text(const MonteCarloTable& t);

void write_eigenvalues_csv(std::ostream& out, const std::vector<cplx>& eigs);
void write_recovered_csv(std::ostream& out, const RecoveredSpectrum& rs);
void write_clusters_csv(std::ostream& out, const std::vector<EigenvalueCluster>& clusters);

}  // namespace specnet
