#pragma once

// Construction of the unique equilibrium partition by outward recursion from
// the world geometric center, variants for an imposed central border and for
// suffrage-expansion border setters, and a numerical equilibrium audit.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "geoline/core.hpp"

namespace geoline {

// ===========================================================================
// Per-state solves
// ===========================================================================

/// Unique root of tau * exp(tau(gamma-1)(1-S/2)^2) * (1-S) = h_eff on (0,1).
/// The central state is symmetric around the WGC, so its remoteness is
/// exp(tau (1-S/2)^2); the left-hand side is strictly decreasing in S.
inline double solve_state0(const ModelParams& params, double h_eff) {
    const double bound = central_feasibility_bound(params);
    if (h_eff == bound)
        throw DegenerateEquality("h_eff equals tau*exp(tau*(gamma-1)); the stateless-center "
                                 "knife edge is excluded");
    if (h_eff > bound)
        throw InfeasibleCentralState("infeasible central state: h_eff exceeds "
                                     "tau*exp(tau*(gamma-1))");
    auto f = [&](double s) {
        const double q = 1.0 - s / 2.0;
        return params.tau * std::exp(params.tau * (params.gamma - 1.0) * q * q) * (1.0 - s) -
               h_eff;
    };
    // f(0) = bound - h_eff > 0 and f(1) = -h_eff < 0.
    return detail::bisect(f, 0.0, 1.0);
}

enum class NextOutcome {
    interior,          ///< optimal size found, at or above eps_size
    below_min_size,    ///< optimal size positive but below eps_size (accumulation)
    no_positive_size,  ///< marginal benefit never reaches h_eff; no state forms
};

struct NextState {
    NextOutcome outcome = NextOutcome::no_positive_size;
    double size = 0;  ///< the FOC root when outcome != no_positive_size
};

/// Size of the state grown rightward from b_prev. Solves the FOC in the
/// substituted variable x = 1 - b_prev - S (distance of the right border from
/// the world end); g(x) = tau * x * exp(tau(gamma-1)/2 [(1+b_prev)^2 + x^2])
/// is strictly increasing, so the root is unique.
inline NextState solve_next_state(double b_prev, const ModelParams& params, double h_eff) {
    if (!(b_prev >= 0.0 && b_prev < 1.0))
        throw DomainError("solve_next_state requires 0 <= b_prev < 1");
    NextState out;
    const double x_max = 1.0 - b_prev;
    // g(x_max) - h_eff is the marginal benefit of the first inch.
    if (foc_residual(b_prev, 0.0, h_eff, params) <= 0.0) {
        out.outcome = NextOutcome::no_positive_size;
        return out;
    }
    auto g = [&](double x) { return foc_residual(b_prev, x_max - x, h_eff, params); };
    // g(0) = -h_eff < 0, g(x_max) > 0.
    const double x = detail::bisect(g, 0.0, x_max);
    out.size = x_max - x;
    out.outcome = out.size < params.eps_size ? NextOutcome::below_min_size
                                             : NextOutcome::interior;
    return out;
}

// ===========================================================================
// Partition assembly
// ===========================================================================

namespace detail {

inline StateRecord make_state(int index, double left, double right, bool polar,
                              const ModelParams& params) {
    StateRecord s;
    s.index = index;
    s.left = left;
    s.right = right;
    s.size = right - left;
    s.remoteness = remoteness(left, right, params);
    s.is_polar = polar;
    return s;
}

/// Builds the full partition from the right-hemisphere border list
/// {b_0, b_1, ..., b_N}; the left hemisphere is the exact mirror image.
inline Partition assemble_partition(const ModelParams& params, double h_eff,
                                    const std::vector<double>& right_borders, bool truncated) {
    Partition p;
    p.params = params;
    p.h_eff = h_eff;
    p.truncated_at_accumulation = truncated;
    p.n_interior = static_cast<int>(right_borders.size()) - 1;

    const int n = p.n_interior;
    const double b_last = right_borders.back();
    if (b_last < 1.0)
        p.states.push_back(make_state(-(n + 1), -1.0, -b_last, true, params));
    for (int k = n; k >= 1; --k)
        p.states.push_back(
            make_state(-k, -right_borders[k], -right_borders[k - 1], false, params));
    p.states.push_back(make_state(0, -right_borders[0], right_borders[0], false, params));
    for (int k = 1; k <= n; ++k)
        p.states.push_back(
            make_state(k, right_borders[k - 1], right_borders[k], false, params));
    if (b_last < 1.0)
        p.states.push_back(make_state(n + 1, b_last, 1.0, true, params));
    return p;
}

constexpr int kMaxInteriorStates = 100000;

inline Partition solve_from_b0(const ModelParams& params, double h_eff, double b0) {
    std::vector<double> borders{b0};
    bool truncated = false;
    while (static_cast<int>(borders.size()) <= kMaxInteriorStates) {
        const NextState next = solve_next_state(borders.back(), params, h_eff);
        if (next.outcome == NextOutcome::interior) {
            borders.push_back(borders.back() + next.size);
            continue;
        }
        truncated = (next.outcome == NextOutcome::below_min_size);
        break;
    }
    return assemble_partition(params, h_eff, borders, truncated);
}

}  // namespace detail

/// The unique equilibrium partition for the given parameters.
inline Partition solve_partition(const ModelParams& params) {
    params.validate();
    const double s0 = solve_state0(params, params.h);
    return detail::solve_from_b0(params, params.h, s0 / 2.0);
}

/// Partition with the central state imposed as (-b0, b0), skipping the
/// central first-order condition. Used for state-0 shock analysis; the
/// central state intentionally need not satisfy its own FOC.
inline Partition solve_partition_given_b0(const ModelParams& params, double b0) {
    params.validate();
    if (!(b0 > 0.0 && b0 < 1.0))
        throw DomainError("solve_partition_given_b0 requires 0 < b0 < 1");
    return detail::solve_from_b0(params, params.h, b0);
}

/// Marginal-utility ratio theta = psi * (C^z / C^l)^gamma = psi *
/// (alpha/(1-alpha))^(2*gamma); state-independent under the normalization.
inline double theta_suffrage(const ModelParams& params) {
    return params.psi * std::pow(params.alpha / (1.0 - params.alpha), 2.0 * params.gamma);
}

/// Partition drawn by border setters with objective U + phi * V. Equivalent
/// to the baseline solve with the reduced cost h_eff = h / (1 + phi * theta);
/// the same code path guarantees exact equality with that substitution.
inline Partition solve_partition_se(const ModelParams& params, double phi) {
    params.validate();
    if (!(phi >= 0.0)) throw DomainError("phi must be >= 0");
    const double h_eff = params.h / (1.0 + phi * theta_suffrage(params));
    const double s0 = solve_state0(params, h_eff);
    return detail::solve_from_b0(params, h_eff, s0 / 2.0);
}

// ===========================================================================
// Equilibrium audit
// ===========================================================================

/// Result of the numerical deviation audit. The audit passes iff every flag
/// is true and the largest FOC residual is below 1e-9.
struct StateAudit {
    int index = 0;
    bool overlord_unimodality_ok = true;
    bool locale_remoteness_minimal_ok = true;
    int locale_violations = 0;
    std::vector<double> violating_locales;  // first few offending coordinates
};

struct EquilibriumAudit {
    double grid_step = 0;
    double max_foc_residual = 0;
    std::vector<StateAudit> states;

    bool passed() const {
        if (!(max_foc_residual < 1e-9)) return false;
        for (const auto& s : states)
            if (!s.overlord_unimodality_ok || !s.locale_remoteness_minimal_ok) return false;
        return true;
    }
};

namespace detail {

/// Overlord utility of the lord at b_prev when the state's distal border is
/// set to b (right-hemisphere form).
inline double overlord_utility(double b_prev, double b, double h_eff,
                               const ModelParams& params) {
    const double r = remoteness(b_prev, b, params);
    return std::pow(r, params.gamma - 1.0) / (1.0 - params.gamma) - h_eff * (b - b_prev);
}

/// Remoteness the locale at t >= 0 would obtain as its own overlord, founding
/// the FOC-optimal state at its position. With no profitable positive size
/// the deviator stands alone and pays costs in both directions.
inline double own_state_remoteness(double t, const ModelParams& params, double h_eff) {
    if (t >= 1.0) {
        const double a = 1.0 + t;
        return std::exp(params.tau / 2.0 * a * a);
    }
    const NextState next = solve_next_state(t, params, h_eff);
    if (next.outcome == NextOutcome::no_positive_size || next.size <= 0.0) {
        const double a = 1.0 + t;
        const double b = 1.0 - t;
        return std::exp(params.tau / 2.0 * (a * a + b * b));
    }
    return remoteness(t, t + next.size, params);
}

inline bool grid_unimodal_with_peak_at(const std::vector<std::pair<double, double>>& pts,
                                       double b_target, double grid_step) {
    if (pts.empty()) return false;
    std::size_t peak = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].second > pts[peak].second) peak = i;
    auto tol = [](double u) { return 1e-12 * (1.0 + std::fabs(u)); };
    for (std::size_t i = 0; i < peak; ++i)
        if (pts[i + 1].second < pts[i].second - tol(pts[i].second)) return false;
    for (std::size_t i = peak; i + 1 < pts.size(); ++i)
        if (pts[i + 1].second > pts[i].second + tol(pts[i].second)) return false;
    return std::fabs(pts[peak].first - b_target) <= grid_step * (1.0 + 1e-9);
}

}  // namespace detail

/// Deviation audit of a partition: (a) each non-polar state's overlord
/// utility, sampled on a grid of candidate distal borders, must be unimodal
/// with its maximum at the recorded border; (b) each sampled locale's
/// assigned remoteness must not exceed the remoteness it would obtain as its
/// own overlord (the deviation the uniqueness argument evaluates; a raw
/// comparison against the proximal neighbor's remoteness is always won by the
/// neighbor and is ruled out by check (a) instead). 64 locales per state plus
/// both borders are sampled. Failures are reported, never thrown.
inline EquilibriumAudit audit_equilibrium(const Partition& partition, double grid_step) {
    if (!(grid_step > 0)) throw DomainError("grid_step must be > 0");
    const ModelParams& params = partition.params;
    const double h_eff = partition.h_eff;
    EquilibriumAudit audit;
    audit.grid_step = grid_step;

    for (const auto& s : partition.states) {
        StateAudit sa;
        sa.index = s.index;

        if (!s.is_polar) {
            // State 0's condition is FOC00, tau R^(gamma-1) (1 - S_0) = h;
            // interior states use the mirrored right-hemisphere FOC.
            const double res =
                s.index == 0
                    ? params.tau * std::pow(s.remoteness, params.gamma - 1.0) * (1.0 - s.size) -
                          h_eff
                    : foc_residual(std::min(std::fabs(s.left), std::fabs(s.right)), s.size,
                                   h_eff, params);
            audit.max_foc_residual = std::max(audit.max_foc_residual, std::fabs(res));

            // (a) overlord unimodality over candidate distal borders,
            // interior states only: for them the deviation utility
            // U(lord at b_prev; right border b) is stationary exactly at the
            // FOC root. The central state's displayed condition (factor
            // 1 - S_0) is not the stationary point of any one-step deviation
            // utility built from the remoteness formula, so state 0 is
            // validated through its FOC00 residual and the locale battery
            // instead of a grid scan.
            if (s.index != 0) {
                const double b_prev = std::min(std::fabs(s.left), std::fabs(s.right));
                const double b_n = std::max(std::fabs(s.left), std::fabs(s.right));
                const double b_max = std::min(b_n + 10.0 * grid_step, 1.0);
                std::vector<std::pair<double, double>> pts;
                for (double b = b_prev + grid_step; b <= b_max + 1e-15; b += grid_step)
                    pts.emplace_back(std::min(b, 1.0),
                                     detail::overlord_utility(b_prev, std::min(b, 1.0), h_eff,
                                                              params));
                bool have_bn = false;
                for (auto& pt : pts)
                    have_bn = have_bn || std::fabs(pt.first - b_n) < grid_step * 1e-9;
                if (!have_bn)
                    pts.emplace_back(b_n,
                                     detail::overlord_utility(b_prev, b_n, h_eff, params));
                std::sort(pts.begin(), pts.end());
                sa.overlord_unimodality_ok =
                    detail::grid_unimodal_with_peak_at(pts, b_n, grid_step);
            }
        }

        // (b) locale remoteness minimality, 64 interior samples plus borders.
        constexpr int kSamples = 64;
        std::vector<double> ts{s.left, s.right};
        for (int i = 0; i < kSamples; ++i)
            ts.push_back(s.left + (i + 0.5) / kSamples * s.size);
        for (double t : ts) {
            const double own =
                detail::own_state_remoteness(std::fabs(t), params, h_eff);
            if (s.remoteness > own * (1.0 + 1e-9)) {
                ++sa.locale_violations;
                if (sa.violating_locales.size() < 8) sa.violating_locales.push_back(t);
            }
        }
        sa.locale_remoteness_minimal_ok = (sa.locale_violations == 0);
        audit.states.push_back(std::move(sa));
    }
    return audit;
}

/// Builds a partition from an explicit right-hemisphere border list; used for
/// hand-perturbed fixtures and document parsing. Borders must be strictly
/// increasing in (0,1].
inline Partition partition_from_right_borders(const ModelParams& params, double h_eff,
                                              const std::vector<double>& right_borders,
                                              bool truncated) {
    params.validate();
    if (right_borders.empty()) throw ValidationError("at least one border required");
    for (std::size_t i = 0; i < right_borders.size(); ++i) {
        if (!(right_borders[i] > 0.0 && right_borders[i] <= 1.0))
            throw ValidationError("borders must lie in (0,1]");
        if (i > 0 && !(right_borders[i] > right_borders[i - 1]))
            throw ValidationError("borders must be strictly increasing");
    }
    return detail::assemble_partition(params, h_eff, right_borders, truncated);
}

}  // namespace geoline
