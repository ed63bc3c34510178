#pragma once

#include <utility>
#include <vector>

#include "specnet/graph.hpp"

namespace specnet::datasets {

// 10-vertex weighted digraph used for the linear and nonlinear small examples
WeightedDigraph ten_vertex();

// Zachary karate club, 34 vertices, 78 undirected unit edges, 0-based
WeightedDigraph karate_club();

// the eleven edges whose removal splits the club into two components
std::vector<std::pair<int, int>> karate_cut_edges();

}  // namespace specnet::datasets
