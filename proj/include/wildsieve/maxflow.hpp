#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wildsieve::graphcut {

/// Capacity of the source -> node and node -> sink edges.
struct TerminalCaps {
    double source = 0.0;
    double sink = 0.0;
};

/// Directed edge from -> to with `capacity`, plus optional to -> from
/// capacity so undirected pairwise terms need a single entry.
struct Arc {
    int from = 0;
    int to = 0;
    double capacity = 0.0;
    double reverse_capacity = 0.0;
};

struct CutResult {
    /// 1 if the node ends on the source side.
    std::vector<std::uint8_t> source_side;
    double cut_value = 0.0;
};

/// Exact s-t minimum cut via Dinic's max-flow. Nodes not reachable from the
/// source in the final residual graph are labeled sink side.
CutResult min_cut(int nodes, std::span<const TerminalCaps> terminals, std::span<const Arc> arcs);

}  // namespace wildsieve::graphcut
