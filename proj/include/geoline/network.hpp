#pragma once

// Strategic network formation over arbitrary geography: link utilities,
// pairwise-stability checking, cost-ordered activation dynamics with random
// link shocks, and Monte Carlo equilibrium-probability estimation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "geoline/core.hpp"

namespace geoline {

// ===========================================================================
// Configuration
// ===========================================================================

/// Node set with either 2-D positions or an explicit symmetric distance
/// matrix, plus the link parameters of the formation game. Nodes are kept
/// sorted by id (numeric strings compare numerically, otherwise
/// lexicographically); ties in activation order and partner order break by
/// ascending id, which this ordering makes index-ascending.
struct NetworkConfig {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> dist;
    std::vector<std::pair<double, double>> positions;  // empty in matrix form
    bool has_positions = false;
    double delta = 0;    ///< unlinked delivery rate, in (0,1]
    double eta = 0;      ///< link cost per unit distance, > 0
    double h = 0;        ///< congestion cost per component member, > 0
    double eps_max = 0;  ///< shock half-width, >= 0
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(ids.size()); }
    double distance(int i, int j) const { return dist[i][j]; }

    void validate() const {
        if (ids.empty()) throw ValidationError("network config has no nodes");
        if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must be in (0,1]");
        if (!(eta > 0.0)) throw ValidationError("eta must be > 0");
        if (!(h > 0.0)) throw ValidationError("h must be > 0");
        if (!(eps_max >= 0.0)) throw ValidationError("eps_max must be >= 0");
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 1; j < ids.size(); ++j)
                if (ids[i] == ids[j]) throw ValidationError("duplicate node id " + ids[i]);
        if (dist.size() != ids.size()) throw ValidationError("distance matrix size mismatch");
        for (std::size_t i = 0; i < dist.size(); ++i) {
            if (dist[i].size() != ids.size())
                throw ValidationError("distance matrix is not square");
            if (dist[i][i] != 0.0) throw ValidationError("distance matrix diagonal must be 0");
            for (std::size_t j = 0; j < dist.size(); ++j) {
                if (!(dist[i][j] >= 0.0)) throw ValidationError("distances must be >= 0");
                if (dist[i][j] != dist[j][i])
                    throw ValidationError("distance matrix must be symmetric");
            }
        }
    }
};

namespace detail {

/// Numeric strings order numerically, everything else lexicographically;
/// numbers sort before non-numbers.
inline bool id_less(const std::string& a, const std::string& b) {
    auto as_number = [](const std::string& s) -> std::optional<long long> {
        if (s.empty()) return std::nullopt;
        std::size_t pos = 0;
        try {
            const long long v = std::stoll(s, &pos);
            if (pos == s.size()) return v;
        } catch (...) {
        }
        return std::nullopt;
    };
    const auto na = as_number(a);
    const auto nb = as_number(b);
    if (na && nb) return *na < *nb;
    if (na != nb) return static_cast<bool>(na);
    return a < b;
}

}  // namespace detail

/// Builds a config from 2-D positions; nodes are sorted by id.
inline NetworkConfig make_network_config(std::vector<std::pair<std::string, std::pair<double, double>>> nodes,
                                         double delta, double eta, double h, double eps_max,
                                         std::uint64_t seed) {
    std::sort(nodes.begin(), nodes.end(),
              [](const auto& a, const auto& b) { return detail::id_less(a.first, b.first); });
    NetworkConfig c;
    c.delta = delta;
    c.eta = eta;
    c.h = h;
    c.eps_max = eps_max;
    c.seed = seed;
    c.has_positions = true;
    for (const auto& [id, xy] : nodes) {
        c.ids.push_back(id);
        c.positions.push_back(xy);
    }
    const int n = c.size();
    c.dist.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            c.dist[i][j] = std::hypot(c.positions[i].first - c.positions[j].first,
                                      c.positions[i].second - c.positions[j].second);
    c.validate();
    return c;
}

// ===========================================================================
// Graphs
// ===========================================================================

/// Undirected graph over a config's nodes (referenced by index). Components
/// are recomputable from the adjacency by traversal.
struct Graph {
    int n = 0;
    std::set<std::pair<int, int>> edges;  // pairs with first < second

    static std::pair<int, int> key(int i, int j) { return {std::min(i, j), std::max(i, j)}; }

    bool linked(int i, int j) const { return edges.count(key(i, j)) > 0; }

    void add(int i, int j) { edges.insert(key(i, j)); }
    void remove(int i, int j) { edges.erase(key(i, j)); }

    /// Component label per node, labels being the smallest member index.
    std::vector<int> components() const {
        std::vector<int> parent(n);
        for (int i = 0; i < n; ++i) parent[i] = i;
        auto find = [&](int v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        for (const auto& [a, b] : edges) {
            const int ra = find(a), rb = find(b);
            if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
        std::vector<int> label(n);
        for (int i = 0; i < n; ++i) label[i] = find(i);
        return label;
    }

    std::vector<int> component_sizes(const std::vector<int>& label) const {
        std::vector<int> sz(n, 0);
        for (int i = 0; i < n; ++i) ++sz[label[i]];
        std::vector<int> out(n);
        for (int i = 0; i < n; ++i) out[i] = sz[label[i]];
        return out;
    }
};

/// Per-pair shocks, symmetric by construction (drawn once per unordered pair).
using PairShocks = std::map<std::pair<int, int>, double>;

/// Utility of the (existing or hypothetical) link between i and j:
/// (1-delta) - eta G_ij - h N_ij (+ eps_ij), where N_ij is the size of the
/// merged component containing both ends if the link exists or were added.
inline double link_utility(int i, int j, const Graph& graph, const NetworkConfig& config,
                           const PairShocks* shocks = nullptr) {
    if (i == j) throw DomainError("link_utility requires i != j");
    if (i < 0 || j < 0 || i >= config.size() || j >= config.size())
        throw UnknownIndex("node index out of range");
    const auto label = graph.components();
    const auto sizes = graph.component_sizes(label);
    const int merged = (label[i] == label[j]) ? sizes[i] : sizes[i] + sizes[j];
    double u = (1.0 - config.delta) - config.eta * config.distance(i, j) - config.h * merged;
    if (shocks) {
        const auto it = shocks->find(Graph::key(i, j));
        if (it != shocks->end()) u += it->second;
    }
    return u;
}

// ===========================================================================
// Pairwise stability
// ===========================================================================

struct PairMargin {
    int i = 0;
    int j = 0;
    double margin = 0;
};

/// Stability report on the unshocked utilities: linked pairs must have
/// margin (1-delta) - eta G - h N_ij >= 0; unlinked pairs must have
/// margin (1-delta) - eta G - h (N_i + N_j) <= 0.
struct StabilityReport {
    std::vector<PairMargin> within_violations;
    std::vector<PairMargin> between_violations;
    bool stable = true;
};

inline StabilityReport check_pairwise_stable(const Graph& graph, const NetworkConfig& config) {
    StabilityReport report;
    const auto label = graph.components();
    const auto sizes = graph.component_sizes(label);
    for (int i = 0; i < config.size(); ++i) {
        for (int j = i + 1; j < config.size(); ++j) {
            const double base = (1.0 - config.delta) - config.eta * config.distance(i, j);
            if (graph.linked(i, j)) {
                const double margin = base - config.h * sizes[i];
                if (margin < 0.0) report.within_violations.push_back({i, j, margin});
            } else {
                const double margin = base - config.h * (sizes[i] + sizes[j]);
                if (margin > 0.0) report.between_violations.push_back({i, j, margin});
            }
        }
    }
    report.stable = report.within_violations.empty() && report.between_violations.empty();
    return report;
}

// ===========================================================================
// Formation dynamics
// ===========================================================================

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Documented per-run seed splitting rule for Monte Carlo runs.
inline std::uint64_t seed_for_run(std::uint64_t master, std::uint64_t run_index) {
    return splitmix64(master + (run_index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Uniform double in [0,1) from the top 53 bits; avoids the
/// implementation-defined std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Draws eps_ij once per unordered pair, i.i.d. uniform on
/// [-eps_max, +eps_max], in ascending (i,j) index order (ids are sorted, so
/// this is ascending id order).
inline PairShocks draw_shocks(const NetworkConfig& config, std::uint64_t seed) {
    PairShocks shocks;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < config.size(); ++i)
        for (int j = i + 1; j < config.size(); ++j)
            shocks[{i, j}] = (2.0 * uniform01(rng) - 1.0) * config.eps_max;
    return shocks;
}

}  // namespace detail

/// Runs the activation dynamics with an explicit shock table: nodes activate
/// by ascending total connection cost TC_i = sum_j G_ij (ties by ascending
/// id); an active node examines partners by ascending distance (ties by
/// ascending id), recomputing component sizes after every decision, forming
/// or keeping a link iff its shocked utility is >= 0 and severing incident
/// links with shocked utility < 0.
inline Graph simulate_formation_with_shocks(const NetworkConfig& config,
                                            const PairShocks& shocks) {
    config.validate();
    const int n = config.size();
    Graph graph;
    graph.n = n;

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::vector<double> tc(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) tc[i] += config.distance(i, j);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return tc[a] < tc[b] || (tc[a] == tc[b] && a < b); });

    for (const int i : order) {
        std::vector<int> partners;
        for (int j = 0; j < n; ++j)
            if (j != i) partners.push_back(j);
        std::stable_sort(partners.begin(), partners.end(), [&](int a, int b) {
            return config.distance(i, a) < config.distance(i, b) ||
                   (config.distance(i, a) == config.distance(i, b) && a < b);
        });
        for (const int j : partners) {
            const double u = link_utility(i, j, graph, config, &shocks);
            if (graph.linked(i, j)) {
                if (u < 0.0) graph.remove(i, j);
            } else {
                if (u >= 0.0) graph.add(i, j);
            }
        }
    }
    return graph;
}

/// Formation dynamics with shocks drawn from the config's seed.
inline Graph simulate_formation(const NetworkConfig& config) {
    config.validate();
    return simulate_formation_with_shocks(config, detail::draw_shocks(config, config.seed));
}

// ===========================================================================
// Equilibrium probability
// ===========================================================================

/// Canonical encoding of a graph: the sorted edge list of sorted id pairs.
inline std::string canonical_edges(const Graph& graph, const NetworkConfig& config) {
    std::string out;
    for (const auto& [a, b] : graph.edges) {
        if (!out.empty()) out += ";";
        out += config.ids[a] + "-" + config.ids[b];
    }
    return out;
}

struct GraphFrequency {
    std::string edges;  ///< canonical encoding
    std::uint64_t count = 0;
    double frequency = 0;
};

/// Thread cap for Monte Carlo sweeps, from GEOLINE_THREADS (>= 1).
inline unsigned sweep_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("GEOLINE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 256));
    }
    return std::min(hw, 8u);
}

/// Empirical distribution over final graphs across `runs` simulations, with
/// per-run seeds derived from (seed, run index) by the documented splitting
/// rule. Results are independent of the thread count; counts sum to runs
/// exactly. Ordered by descending count, then by encoding.
inline std::vector<GraphFrequency> equilibrium_probability(const NetworkConfig& config,
                                                           std::uint64_t runs) {
    config.validate();
    if (runs < 1) throw ValidationError("runs must be >= 1");

    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::uint64_t>(sweep_threads(), runs));
    std::vector<std::map<std::string, std::uint64_t>> partial(n_threads);
    std::atomic<std::uint64_t> next_run{0};

    auto worker = [&](unsigned slot) {
        auto& counts = partial[slot];
        for (;;) {
            const std::uint64_t r = next_run.fetch_add(1);
            if (r >= runs) break;
            const auto shocks =
                detail::draw_shocks(config, detail::seed_for_run(config.seed, r));
            const Graph g = simulate_formation_with_shocks(config, shocks);
            ++counts[canonical_edges(g, config)];
        }
    };
    if (n_threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    std::map<std::string, std::uint64_t> counts;
    for (const auto& p : partial)
        for (const auto& [k, c] : p) counts[k] += c;

    std::vector<GraphFrequency> out;
    for (const auto& [k, c] : counts)
        out.push_back({k, c, static_cast<double>(c) / static_cast<double>(runs)});
    std::sort(out.begin(), out.end(), [](const GraphFrequency& a, const GraphFrequency& b) {
        return a.count > b.count || (a.count == b.count && a.edges < b.edges);
    });
    return out;
}

}  // namespace geoline
