#pragma once

// Gravity trade between states and between fixed areas, in exact and
// Newtonian forms, plus decompositions of trade changes under tau- and
// h-shocks.

#include <cmath>
#include <vector>

#include "geoline/core.hpp"
#include "geoline/solver.hpp"

namespace geoline {

/// Bilateral flow between two states. x_newton is the Newtonian form
/// zeta S_m S_n exp(-tau D); x_exact keeps the pre-approximation integral
/// (kappa/(2 tau)) S_m exp(-tau D) (1 - exp(-tau S_n)).
struct TradeFlow {
    int exporter = 0;
    int importer = 0;
    double distance = 0;
    double x_newton = 0;
    double x_exact = 0;
};

/// Geographic interval anchored to fixed coordinates.
struct FixedArea {
    double lo = 0;
    double hi = 0;

    double size() const { return hi - lo; }
    void validate() const {
        if (!(lo >= -1.0 && lo < hi && hi <= 1.0))
            throw DomainError("fixed area requires -1 <= lo < hi <= 1");
    }
};

/// Log-change decomposition of a bilateral flow under a parameter shock.
/// The discrete product split Delta(tau D) = Dbar*Delta_tau + taubar*Delta_D
/// makes the components sum to the total exactly.
struct GravityDecomposition {
    double size_effect = 0;
    double direct_effect = 0;
    double location_effect = 0;
    double total = 0;
};

/// Gap between the two states' mutually facing borders; 0 for identical or
/// adjacent states.
inline double shortest_distance(const Partition& partition, int m, int n) {
    const StateRecord& a = partition.state(m);
    const StateRecord& b = partition.state(n);
    double d = 0.0;
    if (b.left > a.right)
        d = b.left - a.right;
    else if (a.left > b.right)
        d = a.left - b.right;
    return d;
}

namespace detail {

inline TradeFlow bilateral_flow(const Partition& partition, int m, int n) {
    if (m == n) throw SameState("gravity requires m != n");
    const StateRecord& sm = partition.state(m);
    const StateRecord& sn = partition.state(n);
    const NormalizationConstants norm = normalization(partition.params);
    const double tau = partition.params.tau;
    TradeFlow f;
    f.exporter = m;
    f.importer = n;
    f.distance = shortest_distance(partition, m, n);
    const double decay = std::exp(-tau * f.distance);
    f.x_newton = norm.zeta * (sm.size * sn.size) * decay;
    // expm1 keeps the importer-side factor accurate as tau * S_n -> 0.
    f.x_exact = norm.kappa / (2.0 * tau) * sm.size * decay * (-std::expm1(-tau * sn.size));
    return f;
}

}  // namespace detail

inline TradeFlow gravity_newton(const Partition& partition, int m, int n) {
    return detail::bilateral_flow(partition, m, n);
}

inline TradeFlow gravity_exact(const Partition& partition, int m, int n) {
    return detail::bilateral_flow(partition, m, n);
}

/// Flow between two disjoint fixed areas, anchored on their inner-facing
/// endpoints: zeta F_u F_v exp(-tau D) with D the shortest distance between
/// the states containing those endpoints (0 if the same state).
inline double gravity_fixed_area(const Partition& partition, const FixedArea& u,
                                 const FixedArea& v) {
    u.validate();
    v.validate();
    if (u.lo < v.hi && v.lo < u.hi) throw DomainError("fixed areas overlap");
    const FixedArea& left = (u.hi <= v.lo) ? u : v;
    const FixedArea& right = (u.hi <= v.lo) ? v : u;
    const int m = partition.state_at(left.hi).index;
    const int n = partition.state_at(right.lo).index;
    const double d = shortest_distance(partition, m, n);
    const double zeta = normalization(partition.params).zeta;
    return zeta * u.size() * v.size() * std::exp(-partition.params.tau * d);
}

/// All ordered pairs plus the domestic diagonal X_{n,n} = zeta S_n^2.
inline std::vector<TradeFlow> trade_matrix(const Partition& partition) {
    std::vector<TradeFlow> flows;
    const double zeta = normalization(partition.params).zeta;
    for (const auto& a : partition.states) {
        for (const auto& b : partition.states) {
            if (a.index == b.index) {
                TradeFlow f;
                f.exporter = a.index;
                f.importer = a.index;
                f.distance = 0.0;
                f.x_newton = zeta * (a.size * a.size);
                f.x_exact = f.x_newton;  // domestic trade is costless, no approximation
                flows.push_back(f);
            } else {
                flows.push_back(gravity_newton(partition, a.index, b.index));
            }
        }
    }
    return flows;
}

/// Decomposes the log change of X_{m,n} under a tau- or h-shock into size,
/// direct and location effects. Both partitions must contain states m and n
/// with the interior count unchanged.
inline GravityDecomposition decompose_change(const ModelParams& params,
                                             const ParameterShock& shock, int m, int n) {
    params.validate();
    ModelParams shocked = params;
    if (shock.parameter == ParameterShock::Param::tau)
        shocked.tau += shock.delta;
    else
        shocked.h += shock.delta;

    const Partition base = solve_partition(params);
    const Partition post = solve_partition(shocked);
    if (base.n_interior != post.n_interior)
        throw StateCountChanged("shock changes the interior state count (" +
                                std::to_string(base.n_interior) + " -> " +
                                std::to_string(post.n_interior) + ")");
    if (!post.has_state(m) || !post.has_state(n))
        throw UnknownIndex("state missing from shocked partition");

    const TradeFlow f0 = gravity_newton(base, m, n);
    const TradeFlow f1 = gravity_newton(post, m, n);

    GravityDecomposition d;
    d.total = std::log(f1.x_newton) - std::log(f0.x_newton);
    d.size_effect = std::log(post.state(m).size) - std::log(base.state(m).size) +
                    std::log(post.state(n).size) - std::log(base.state(n).size);
    const double d_bar = 0.5 * (f0.distance + f1.distance);
    const double tau_bar = 0.5 * (params.tau + shocked.tau);
    const double delta_tau = shocked.tau - params.tau;
    const double delta_d = f1.distance - f0.distance;
    d.direct_effect = (delta_tau == 0.0) ? 0.0 : -d_bar * delta_tau;
    d.location_effect = (delta_d == 0.0) ? 0.0 : -tau_bar * delta_d;
    return d;
}

}  // namespace geoline
