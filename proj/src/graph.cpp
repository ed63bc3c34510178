#include "specnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

namespace specnet {

WeightedDigraph::WeightedDigraph(int n, std::vector<Edge> arcs, bool directed)
    : n_(n), directed_(directed), arcs_(std::move(arcs)) {
    if (n < 0) throw Error("negative vertex count");
    std::map<std::pair<int, int>, double> seen;
    for (const auto& e : arcs_) {
        if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
            throw Error("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ") out of range");
        if (e.i == e.j) throw Error("self-loop at vertex " + std::to_string(e.i));
        if (!(e.w > 0) || !std::isfinite(e.w)) throw Error("nonpositive weight on edge");
        if (!seen.emplace(std::make_pair(e.i, e.j), e.w).second)
            throw Error("duplicate arc (" + std::to_string(e.i) + "," + std::to_string(e.j) + ")");
    }
    if (!directed_) {
        for (const auto& e : arcs_) {
            auto it = seen.find({e.j, e.i});
            if (it == seen.end() || it->second != e.w) throw Error("undirected graph with asymmetric edge set");
        }
    }
    std::sort(arcs_.begin(), arcs_.end(), [](const Edge& a, const Edge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
}

Mat WeightedDigraph::weight_matrix() const {
    Mat W = Mat::Zero(n_, n_);
    for (const auto& e : arcs_) W(e.i, e.j) = e.w;
    return W;
}

std::vector<double> WeightedDigraph::out_degrees() const {
    std::vector<double> d(n_, 0.0);
    for (const auto& e : arcs_) d[e.i] += e.w;
    return d;
}

std::vector<std::vector<std::pair<int, double>>> WeightedDigraph::out_lists() const {
    std::vector<std::vector<std::pair<int, double>>> out(n_);
    for (const auto& e : arcs_) out[e.i].push_back({e.j, e.w});
    return out;
}

Mat laplacian(const WeightedDigraph& g) {
    Mat L = Mat::Zero(g.n(), g.n());
    for (const auto& e : g.arcs()) {
        L(e.i, e.j) -= e.w;
        L(e.i, e.i) += e.w;
    }
    return L;
}

DegreeStats degree_stats(const WeightedDigraph& g) {
    DegreeStats s;
    auto d = g.out_degrees();
    if (d.empty()) return s;
    s.d_min = *std::min_element(d.begin(), d.end());
    s.d_max = *std::max_element(d.begin(), d.end());
    for (double x : d) {
        s.D1 += x;
        s.D2 += x * x;
    }
    s.D1 /= g.n();
    s.D2 /= g.n();
    return s;
}

std::vector<double> trace_moments(const Mat& M, int k_max) {
    std::vector<double> out(k_max + 1);
    const double n = static_cast<double>(M.rows());
    out[0] = 1.0;
    Mat P = Mat::Identity(M.rows(), M.cols());
    for (int k = 1; k <= k_max; ++k) {
        P = P * M;
        out[k] = P.trace() / n;
    }
    return out;
}

SpectralMomentSet exact_spectral_moments(const WeightedDigraph& g, int k_max) {
    if (k_max < 1) throw Error("k_max must be >= 1");
    if (g.n() == 0) throw Error("empty graph has no spectral moments");
    return {trace_moments(laplacian(g), k_max)};
}

CVec laplacian_spectrum(const WeightedDigraph& g) {
    if (g.n() == 0) return CVec();
    Eigen::EigenSolver<Mat> es(laplacian(g), false);
    return es.eigenvalues();
}

WeightedDigraph gen_erdos_renyi(int n, double p_edge, const Distribution& weight_dist, bool directed,
                                std::uint64_t seed) {
    if (p_edge < 0 || p_edge > 1) throw Error("edge probability outside [0,1]");
    Rng rng(seed);
    std::bernoulli_distribution coin(p_edge);
    std::vector<Edge> arcs;
    for (int i = 0; i < n; ++i) {
        for (int j = directed ? 0 : i + 1; j < n; ++j) {
            if (i == j || !coin(rng)) continue;
            double w = weight_dist.sample(rng);
            // a zero draw from e.g. uniform(0, b) is measure-zero; keep the edge
            if (w <= 0) w = std::numeric_limits<double>::min();
            arcs.push_back({i, j, w});
            if (!directed) arcs.push_back({j, i, w});
        }
    }
    return WeightedDigraph(n, std::move(arcs), directed);
}

WeightedDigraph gen_degree_sequence(int n, const Distribution& degree_dist, const Distribution& weight_dist,
                                    std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> deg(n);
    long total = 0;
    for (int i = 0; i < n; ++i) {
        double x = std::round(degree_dist.sample(rng));
        deg[i] = static_cast<int>(std::clamp(x, 0.0, static_cast<double>(std::max(n - 1, 0))));
        total += deg[i];
    }
    if (total % 2 != 0) {
        // fix parity on a random vertex
        std::uniform_int_distribution<int> pick(0, n - 1);
        int v = pick(rng);
        if (deg[v] > 0) --deg[v]; else ++deg[v];
        --total;
    }
    std::vector<int> stubs;
    stubs.reserve(total);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < deg[i]; ++k) stubs.push_back(i);

    std::set<std::pair<int, int>> used;
    auto key = [](int u, int v) { return std::make_pair(std::min(u, v), std::max(u, v)); };
    const long max_retries = 100L * std::max(n, 1);
    long retries = 0;
    while (stubs.size() >= 2 && retries < max_retries) {
        std::uniform_int_distribution<std::size_t> pick(0, stubs.size() - 1);
        std::size_t a = pick(rng), b = pick(rng);
        int u = stubs[a], v = stubs[b];
        if (a == b || u == v || used.count(key(u, v))) {
            ++retries;
            continue;
        }
        used.insert(key(u, v));
        if (a < b) std::swap(a, b);
        stubs[a] = stubs.back();
        stubs.pop_back();
        stubs[b] = stubs.back();
        stubs.pop_back();
        retries = 0;
    }
    // Stuck pairs (u, v) are placed by rewiring a random edge x-y into u-x, v-y,
    // which keeps the degrees of x and y.
    retries = 0;
    while (stubs.size() >= 2 && retries < max_retries && !used.empty()) {
        int u = stubs[stubs.size() - 1], v = stubs[stubs.size() - 2];
        std::uniform_int_distribution<std::size_t> pick(0, used.size() - 1);
        auto it = std::next(used.begin(), static_cast<long>(pick(rng)));
        auto [x, y] = *it;
        if (Rng::result_type(rng()) & 1) std::swap(x, y);
        if (x == u || x == v || y == u || y == v || used.count(key(u, x)) || used.count(key(v, y))) {
            ++retries;
            continue;
        }
        used.erase(it);
        used.insert(key(u, x));
        used.insert(key(v, y));
        stubs.pop_back();
        stubs.pop_back();
        retries = 0;
    }
    // leftover stubs are dropped when the sequence is only marginally
    // unrealizable; a large remainder means the draw itself is infeasible
    if (total > 0 && static_cast<double>(stubs.size()) > 0.10 * static_cast<double>(total))
        throw ConvergenceError("degree sequence pairing failed: " + std::to_string(stubs.size()) + " of " +
                               std::to_string(total) + " stubs unmatched");
    std::vector<Edge> arcs;
    for (auto [u, v] : used) {
        double w = weight_dist.sample(rng);
        if (w <= 0) w = std::numeric_limits<double>::min();
        arcs.push_back({u, v, w});
        arcs.push_back({v, u, w});
    }
    return WeightedDigraph(n, std::move(arcs), false);
}

WeightedDigraph load_edge_list(std::istream& in, bool directed, int n) {
    std::string line;
    int line_no = 0;
    std::map<std::pair<int, int>, double> arcs;
    int max_index = -1;
    int header_n = -1;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            // "# n <count>" header written by write_edge_list
            std::istringstream hs(line.substr(hash + 1));
            std::string key;
            int count = -1;
            if (n < 0 && hs >> key >> count && key == "n" && count >= 0) header_n = count;
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok.size() < 2 || tok.size() > 3) throw ParseError(line_no, "expected 'i j [w]'");
        long i = 0, j = 0;
        double w = 1.0;
        try {
            std::size_t pos = 0;
            i = std::stol(tok[0], &pos);
            if (pos != tok[0].size()) throw std::invalid_argument("index");
            j = std::stol(tok[1], &pos);
            if (pos != tok[1].size()) throw std::invalid_argument("index");
            if (tok.size() == 3) {
                w = std::stod(tok[2], &pos);
                if (pos != tok[2].size()) throw std::invalid_argument("weight");
            }
        } catch (const std::exception&) {
            throw ParseError(line_no, "malformed line '" + line + "'");
        }
        if (i < 0 || j < 0 || (n >= 0 && (i >= n || j >= n)))
            throw ParseError(line_no, "vertex index out of range");
        if (i == j) throw ParseError(line_no, "self-loop");
        if (!(w > 0) || !std::isfinite(w)) throw ParseError(line_no, "nonpositive weight");
        auto put = [&](int a, int b) {
            auto [it, fresh] = arcs.emplace(std::make_pair(a, b), w);
            if (!fresh && it->second != w) throw ParseError(line_no, "conflicting weight for repeated edge");
            if (!fresh && directed) throw ParseError(line_no, "duplicate arc");
        };
        put(static_cast<int>(i), static_cast<int>(j));
        if (!directed) put(static_cast<int>(j), static_cast<int>(i));
        max_index = std::max<int>(max_index, static_cast<int>(std::max(i, j)));
    }
    if (n < 0) n = std::max(max_index + 1, header_n);
    else if (max_index >= n) throw ParseError(line_no, "vertex index out of range");
    std::vector<Edge> list;
    list.reserve(arcs.size());
    for (const auto& [k, w] : arcs) list.push_back({k.first, k.second, w});
    return WeightedDigraph(n, std::move(list), directed);
}

void write_edge_list(std::ostream& out, const WeightedDigraph& g) {
    out << "# n " << g.n() << (g.directed() ? " directed" : " undirected") << "\n";
    out.precision(17);
    for (const auto& e : g.arcs()) {
        if (!g.directed() && e.i > e.j) continue;
        out << e.i << " " << e.j << " " << e.w << "\n";
    }
}

WeightedDigraph unweight(const WeightedDigraph& g) {
    auto arcs = g.arcs();
    for (auto& e : arcs) e.w = 1.0;
    return WeightedDigraph(g.n(), std::move(arcs), g.directed());
}

WeightedDigraph remove_edges(const WeightedDigraph& g, const std::vector<std::pair<int, int>>& pairs) {
    std::set<std::pair<int, int>> drop;
    for (auto [a, b] : pairs) {
        drop.insert({a, b});
        drop.insert({b, a});
    }
    std::vector<Edge> arcs;
    for (const auto& e : g.arcs())
        if (!drop.count({e.i, e.j})) arcs.push_back(e);
    return WeightedDigraph(g.n(), std::move(arcs), g.directed());
}

WeightedDigraph add_pendant_vertex(const WeightedDigraph& g, int anchor, double w) {
    if (anchor < 0 || anchor >= g.n()) throw Error("pendant anchor out of range");
    auto arcs = g.arcs();
    arcs.push_back({g.n(), anchor, w});
    arcs.push_back({anchor, g.n(), w});
    return WeightedDigraph(g.n() + 1, std::move(arcs), g.directed());
}

WeightedDigraph random_orientation(const WeightedDigraph& g, Rng& rng) {
    if (g.directed()) throw Error("random_orientation expects an undirected graph");
    std::bernoulli_distribution coin(0.5);
    std::vector<Edge> arcs;
    for (const auto& e : g.arcs()) {
        if (e.i > e.j) continue;
        if (coin(rng)) arcs.push_back(e);
        else arcs.push_back({e.j, e.i, e.w});
    }
    return WeightedDigraph(g.n(), std::move(arcs), true);
}

namespace {

std::vector<std::vector<int>> undirected_neighbours(const WeightedDigraph& g) {
    std::vector<std::vector<int>> nb(g.n());
    for (const auto& e : g.arcs()) {
        nb[e.i].push_back(e.j);
        nb[e.j].push_back(e.i);
    }
    return nb;
}

}  // namespace

std::vector<int> bfs_distances(const WeightedDigraph& g, int src) {
    auto nb = undirected_neighbours(g);
    std::vector<int> dist(g.n(), -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : nb[u])
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
    }
    return dist;
}

std::vector<int> connected_components(const WeightedDigraph& g, int* count) {
    auto nb = undirected_neighbours(g);
    std::vector<int> label(g.n(), -1);
    int c = 0;
    for (int s = 0; s < g.n(); ++s) {
        if (label[s] >= 0) continue;
        std::vector<int> stack{s};
        label[s] = c;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : nb[u])
                if (label[v] < 0) {
                    label[v] = c;
                    stack.push_back(v);
                }
        }
        ++c;
    }
    if (count) *count = c;
    return label;
}

std::pair<double, double> degree_bounds_from_spectrum(double lambda2, double lambda_n, int n) {
    if (n < 2) throw Error("degree bounds need n >= 2");
    double f = (n - 1.0) / n;
    return {f * lambda2, f * lambda_n};
}

DegreeMomentReport degree_stats_from_moments(double M1, double M2) {
    DegreeMomentReport r;
    r.D1 = M1;
    double lo = std::max(M1 * M1, M2 / 2.0);
    double hi = M2;
    r.consistent = M1 >= 0 && M2 >= M1 * M1;
    if (lo > hi) std::swap(lo, hi);
    r.D2_lo = lo;
    r.D2_hi = hi;
    return r;
}

}  // namespace specnet
