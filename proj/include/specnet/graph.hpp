#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "specnet/common.hpp"
#include "specnet/random.hpp"

namespace specnet {

struct Edge {
    int i;
    int j;
    double w;
};

// Arcs (i -> j) with w(i,j) > 0. An undirected graph stores both arcs of
// every edge with equal weight. The row of vertex i in W lists the vertices
// that influence i.
class WeightedDigraph {
public:
    WeightedDigraph() = default;
    WeightedDigraph(int n, std::vector<Edge> arcs, bool directed);

    int n() const { return n_; }
    bool directed() const { return directed_; }
    const std::vector<Edge>& arcs() const { return arcs_; }
    // undirected edges count once
    std::size_t edge_count() const { return directed_ ? arcs_.size() : arcs_.size() / 2; }

    Mat weight_matrix() const;
    std::vector<double> out_degrees() const;
    std::vector<std::vector<std::pair<int, double>>> out_lists() const;

private:
    int n_ = 0;
    bool directed_ = true;
    std::vector<Edge> arcs_;
};

struct DegreeStats {
    double d_min = 0, d_max = 0;
    double D1 = 0, D2 = 0;
};

struct SpectralMomentSet {
    std::vector<double> moments;  // moments[0] == 1
};

Mat laplacian(const WeightedDigraph& g);
DegreeStats degree_stats(const WeightedDigraph& g);
SpectralMomentSet exact_spectral_moments(const WeightedDigraph& g, int k_max);
// (1/n) tr(M^k), k = 0..k_max
std::vector<double> trace_moments(const Mat& M, int k_max);
CVec laplacian_spectrum(const WeightedDigraph& g);

WeightedDigraph gen_erdos_renyi(int n, double p_edge, const Distribution& weight_dist, bool directed,
                                std::uint64_t seed);
WeightedDigraph gen_degree_sequence(int n, const Distribution& degree_dist, const Distribution& weight_dist,
                                    std::uint64_t seed);

// "i j [w]" per line, '#' comments. Undirected input adds both arcs; a
// repeated pair is accepted when the weights agree. n < 0 infers the vertex
// count from the largest index.
WeightedDigraph load_edge_list(std::istream& in, bool directed = false, int n = -1);
void write_edge_list(std::ostream& out, const WeightedDigraph& g);
WeightedDigraph unweight(const WeightedDigraph& g);

WeightedDigraph remove_edges(const WeightedDigraph& g, const std::vector<std::pair<int, int>>& pairs);
// new vertex n joined to `anchor` by one undirected edge of weight w
WeightedDigraph add_pendant_vertex(const WeightedDigraph& g, int anchor, double w = 1.0);
// keeps exactly one arc of every undirected edge, each direction with prob 1/2
WeightedDigraph random_orientation(const WeightedDigraph& g, Rng& rng);

// hop distances from src ignoring direction; -1 when unreachable
std::vector<int> bfs_distances(const WeightedDigraph& g, int src);
// weakly connected components, labels 0..k-1
std::vector<int> connected_components(const WeightedDigraph& g, int* count = nullptr);

std::pair<double, double> degree_bounds_from_spectrum(double lambda2, double lambda_n, int n);

struct DegreeMomentReport {
    double D1 = 0;
    double D2_lo = 0, D2_hi = 0;
    bool consistent = true;  // false when M2 < M1^2 or M1 < 0; interval clamped
};
DegreeMomentReport degree_stats_from_moments(double M1, double M2);

}  // namespace specnet
