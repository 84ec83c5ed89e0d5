#include "wildsieve/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wildsieve/error.hpp"

namespace wildsieve::graphcut {

namespace {

class Dinic {
public:
    explicit Dinic(int nodes) : head_(static_cast<std::size_t>(nodes), -1) {}

    void add_edge(int u, int v, double cap, double rev_cap) {
        to_.push_back(v);
        cap_.push_back(cap);
        next_.push_back(head_[static_cast<std::size_t>(u)]);
        head_[static_cast<std::size_t>(u)] = static_cast<int>(to_.size()) - 1;
        to_.push_back(u);
        cap_.push_back(rev_cap);
        next_.push_back(head_[static_cast<std::size_t>(v)]);
        head_[static_cast<std::size_t>(v)] = static_cast<int>(to_.size()) - 1;
    }

    double max_flow(int s, int t) {
        double flow = 0.0;
        while (build_levels(s, t)) {
            iter_ = head_;
            flow += blocking_flow(s, t);
        }
        return flow;
    }

    std::vector<std::uint8_t> reachable(int s) const {
        std::vector<std::uint8_t> seen(head_.size(), 0);
        std::vector<int> queue{s};
        seen[static_cast<std::size_t>(s)] = 1;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const int u = queue[qi];
            for (int e = head_[static_cast<std::size_t>(u)]; e >= 0; e = next_[static_cast<std::size_t>(e)]) {
                const int v = to_[static_cast<std::size_t>(e)];
                if (cap_[static_cast<std::size_t>(e)] > 0.0 && !seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    queue.push_back(v);
                }
            }
        }
        return seen;
    }

private:
    bool build_levels(int s, int t) {
        level_.assign(head_.size(), -1);
        std::vector<int> queue{s};
        level_[static_cast<std::size_t>(s)] = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const int u = queue[qi];
            for (int e = head_[static_cast<std::size_t>(u)]; e >= 0; e = next_[static_cast<std::size_t>(e)]) {
                const int v = to_[static_cast<std::size_t>(e)];
                if (cap_[static_cast<std::size_t>(e)] > 0.0 && level_[static_cast<std::size_t>(v)] < 0) {
                    level_[static_cast<std::size_t>(v)] = level_[static_cast<std::size_t>(u)] + 1;
                    queue.push_back(v);
                }
            }
        }
        return level_[static_cast<std::size_t>(t)] >= 0;
    }

    // Iterative DFS over the level graph with current-arc pointers.
    double blocking_flow(int s, int t) {
        double total = 0.0;
        std::vector<int> path;
        int u = s;
        while (true) {
            if (u == t) {
                double bottleneck = std::numeric_limits<double>::infinity();
                for (int e : path) bottleneck = std::min(bottleneck, cap_[static_cast<std::size_t>(e)]);
                std::size_t first_saturated = path.size();
                for (std::size_t i = 0; i < path.size(); ++i) {
                    const auto e = static_cast<std::size_t>(path[i]);
                    cap_[e] -= bottleneck;
                    cap_[e ^ 1U] += bottleneck;
                    if (cap_[e] <= 0.0 && first_saturated == path.size()) first_saturated = i;
                }
                total += bottleneck;
                path.resize(first_saturated);
                u = path.empty() ? s : to_[static_cast<std::size_t>(path.back())];
                continue;
            }
            int& e = iter_[static_cast<std::size_t>(u)];
            while (e >= 0) {
                const int v = to_[static_cast<std::size_t>(e)];
                if (cap_[static_cast<std::size_t>(e)] > 0.0 &&
                    level_[static_cast<std::size_t>(v)] == level_[static_cast<std::size_t>(u)] + 1) {
                    break;
                }
                e = next_[static_cast<std::size_t>(e)];
            }
            if (e >= 0) {
                path.push_back(e);
                u = to_[static_cast<std::size_t>(e)];
                continue;
            }
            // Dead end: retire u from this phase and back up one edge.
            level_[static_cast<std::size_t>(u)] = -1;
            if (path.empty()) break;
            const int back = path.back();
            path.pop_back();
            u = to_[static_cast<std::size_t>(back) ^ 1U];
            iter_[static_cast<std::size_t>(u)] = next_[static_cast<std::size_t>(back)];
        }
        return total;
    }

    std::vector<int> head_;
    std::vector<int> iter_;
    std::vector<int> level_;
    std::vector<int> to_;
    std::vector<int> next_;
    std::vector<double> cap_;
};

void check_capacity(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw InvalidArgument("graph capacities must be finite and non-negative");
    }
}

}  // namespace

CutResult min_cut(int nodes, std::span<const TerminalCaps> terminals, std::span<const Arc> arcs) {
    if (nodes < 0 || terminals.size() != static_cast<std::size_t>(nodes)) {
        throw InvalidArgument("terminal capacity list must have one entry per node");
    }
    const int s = nodes;
    const int t = nodes + 1;
    Dinic graph(nodes + 2);
    double direct = 0.0;
    for (int n = 0; n < nodes; ++n) {
        const auto& tc = terminals[static_cast<std::size_t>(n)];
        check_capacity(tc.source);
        check_capacity(tc.sink);
        // Flow along s -> n -> t can be pushed up front.
        const double shared = std::min(tc.source, tc.sink);
        direct += shared;
        if (tc.source - shared > 0.0) graph.add_edge(s, n, tc.source - shared, 0.0);
        if (tc.sink - shared > 0.0) graph.add_edge(n, t, tc.sink - shared, 0.0);
    }
    for (const auto& arc : arcs) {
        if (arc.from < 0 || arc.from >= nodes || arc.to < 0 || arc.to >= nodes) {
            throw InvalidArgument("arc endpoint out of range: " + std::to_string(arc.from) + " -> " +
                                  std::to_string(arc.to));
        }
        check_capacity(arc.capacity);
        check_capacity(arc.reverse_capacity);
        if (arc.from == arc.to) continue;
        if (arc.capacity > 0.0 || arc.reverse_capacity > 0.0) {
            graph.add_edge(arc.from, arc.to, arc.capacity, arc.reverse_capacity);
        }
    }
    CutResult out;
    out.cut_value = direct + graph.max_flow(s, t);
    auto seen = graph.reachable(s);
    out.source_side.assign(seen.begin(), seen.begin() + nodes);
    return out;
}

}  // namespace wildsieve::graphcut
