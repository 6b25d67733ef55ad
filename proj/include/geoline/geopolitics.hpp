#pragma once

// Comparative statics and ideology measures: border effect, border-stability
// compensation, state-size responses, state-0 shock propagation, national
// opinion statistics, and separatism profiles.

#include <cmath>
#include <map>
#include <vector>

#include "geoline/core.hpp"
#include "geoline/solver.hpp"

namespace geoline {

// ===========================================================================
// FOC partials (closed forms)
// ===========================================================================

/// Partial derivatives of F = tau R^(gamma-1) (1 - b_prev - S) - h at a
/// right-hemisphere state (b_prev, b_n = b_prev + S).
struct FocPartials {
    double f_tau = 0;  ///< > 0 always
    double f_s = 0;    ///< < 0 always
    double f_b = 0;    ///< sign depends on the state's position
    double f_h = -1.0;
};

inline FocPartials foc_partials(double b_prev, double b_n, const ModelParams& params) {
    if (!(b_prev >= 0.0 && b_prev < b_n && b_n <= 1.0))
        throw DomainError("foc_partials requires 0 <= b_prev < b_n <= 1");
    const double tau = params.tau;
    const double g1 = params.gamma - 1.0;
    const double size = b_n - b_prev;
    const double x = 1.0 - b_n;
    const double a = 1.0 + b_prev;
    const double r_pow = std::exp(tau * g1 / 2.0 * (a * a + x * x));
    FocPartials p;
    p.f_s = -g1 * r_pow * tau * tau * x * x - tau * r_pow;
    p.f_b = g1 * r_pow * tau * tau * (2.0 * b_prev + size) * x - tau * r_pow;
    p.f_tau = r_pow * x * (1.0 + tau * g1 / 2.0 * (a * a + x * x));
    return p;
}

namespace detail {

/// Mirrors a state into right-hemisphere border form (b_prev, b_n).
inline std::pair<double, double> mirrored_borders(const StateRecord& s) {
    const double lo = std::min(std::fabs(s.left), std::fabs(s.right));
    const double hi = std::max(std::fabs(s.left), std::fabs(s.right));
    return {lo, hi};
}

inline const StateRecord& interior_state(const Partition& partition, int n) {
    const StateRecord& s = partition.state(n);
    if (s.is_polar) throw PolarState("operation requires a non-polar state");
    return s;
}

}  // namespace detail

// ===========================================================================
// Border effect and stability
// ===========================================================================

/// Relative importance of a shared border for the distal versus proximal
/// state, (1 + b_k) / (1 - b_k).
inline double border_effect(double b_k) {
    if (!(b_k >= 0.0 && b_k < 1.0)) throw DomainError("border_effect requires 0 <= b_k < 1");
    return (1.0 + b_k) / (1.0 - b_k);
}

/// dh/dtau that keeps state n's border condition satisfied:
/// F_tau = R^(gamma-1) (1-b_n) (1 + tau(gamma-1)/2 [(1+b_prev)^2 + (1-b_n)^2]).
inline double stability_compensation(const Partition& partition, int n) {
    const StateRecord& s = detail::interior_state(partition, n);
    if (n == 0) throw DomainError("stability_compensation applies to states n != 0");
    const auto [b_prev, b_n] = detail::mirrored_borders(s);
    return foc_partials(b_prev, b_n, partition.params).f_tau;
}

struct SizeResponse {
    double dSn_dbprev_analytic = 0;  ///< -F_b / F_S
    bool F_b_positive = false;
    bool taurange_holds = false;  ///< tau > 1 / ((gamma-1) b_0 (1-b_0))
};

inline SizeResponse local_size_response(const Partition& partition, int n) {
    const StateRecord& s = detail::interior_state(partition, n);
    if (std::abs(n) < 1) throw DomainError("local_size_response requires |n| >= 1");
    const auto [b_prev, b_n] = detail::mirrored_borders(s);
    const FocPartials p = foc_partials(b_prev, b_n, partition.params);
    SizeResponse r;
    r.dSn_dbprev_analytic = -p.f_b / p.f_s;
    r.F_b_positive = p.f_b > 0.0;
    const double b0 = partition.state(0).right;
    r.taurange_holds =
        partition.params.tau > 1.0 / ((partition.params.gamma - 1.0) * b0 * (1.0 - b0));
    return r;
}

// ===========================================================================
// State-0 shocks
// ===========================================================================

struct ShockRow {
    int index = 0;
    double db_db0_fd = 0;           ///< finite-difference db_n / db_0
    double dS_db0_fd = 0;           ///< finite-difference dS_n / db_0
    double dS_dbprev_analytic = 0;  ///< -F_b / F_S at the baseline state
    double db_db0_chain = 0;        ///< product of (1 + dS_k/db_{k-1}) over k <= n
    bool F_b_positive = false;
};

struct ShockTable {
    double b0 = 0;
    double delta_b0 = 0;
    std::vector<ShockRow> rows;  ///< right-hemisphere interior states 1..N
};

/// Central finite differences of every interior border and size with respect
/// to the central border, alongside the analytic chain products
/// db_n/db_0 = prod_k (1 + dS_k/db_{k-1}). Throws StateCountChanged if the
/// perturbed solves change the interior count.
inline ShockTable state0_shock(const ModelParams& params, double delta_b0) {
    params.validate();
    if (!(std::fabs(delta_b0) <= 10.0 * params.fd_step))
        throw DomainError("|delta_b0| must not exceed 10 * fd_step");
    const Partition base = solve_partition(params);
    ShockTable table;
    table.b0 = base.state(0).right;
    table.delta_b0 = delta_b0;

    Partition up = base;
    Partition down = base;
    if (delta_b0 != 0.0) {
        up = solve_partition_given_b0(params, table.b0 + delta_b0);
        down = solve_partition_given_b0(params, table.b0 - delta_b0);
        if (up.n_interior != base.n_interior || down.n_interior != base.n_interior)
            throw StateCountChanged("state-0 shock changes the interior state count");
    }

    double chain = 1.0;
    for (int n = 1; n <= base.n_interior; ++n) {
        const StateRecord& s = base.state(n);
        const FocPartials p = foc_partials(s.left, s.right, params);
        ShockRow row;
        row.index = n;
        row.dS_dbprev_analytic = -p.f_b / p.f_s;
        row.F_b_positive = p.f_b > 0.0;
        chain *= 1.0 + row.dS_dbprev_analytic;
        row.db_db0_chain = chain;
        if (delta_b0 != 0.0) {
            const double two_d = 2.0 * delta_b0;
            row.db_db0_fd = (up.state(n).right - down.state(n).right) / two_d;
            row.dS_db0_fd = (up.state(n).size - down.state(n).size) / two_d;
        }
        table.rows.push_back(row);
    }
    return table;
}

// ===========================================================================
// National opinion
// ===========================================================================

/// National opinions G_n = (b_{n-1} + b_n)/2 per state (polar semi-states
/// included per their borders). The mean is accumulated over mirror pairs so
/// symmetry cancels exactly; the variance averages G_n^2 over the
/// right-hemisphere entries.
struct OpinionStats {
    std::map<int, double> opinions;
    double mean = 0;
    double variance = 0;
    int n_per_hemisphere = 0;  ///< interior states per hemisphere
};

inline OpinionStats national_opinions(const Partition& partition) {
    OpinionStats st;
    st.n_per_hemisphere = partition.n_interior;
    for (const auto& s : partition.states)
        st.opinions[s.index] = 0.5 * (s.left + s.right);

    double mean_acc = st.opinions.count(0) ? st.opinions.at(0) : 0.0;
    double var_acc = 0.0;
    int right_count = 0;
    for (const auto& [idx, g] : st.opinions) {
        if (idx <= 0) continue;
        mean_acc += g + st.opinions.at(-idx);  // exact cancellation per mirror pair
        var_acc += g * g;
        ++right_count;
    }
    st.mean = mean_acc / static_cast<double>(st.opinions.size());
    st.variance = right_count > 0 ? var_acc / right_count : 0.0;
    return st;
}

struct VarianceSensitivity {
    double d_var = 0;  ///< Var(shocked) - Var(base)
    bool state_partials_ok = false;
};

/// Finite-difference change of opinion dispersion under a parameter shock,
/// guarded by the interior state count. state_partials_ok asserts the
/// per-state partial signs -F_tau/F_S > 0 and -F_h/F_S < 0 at every interior
/// state of the baseline; the full-equilibrium sign of d_var is reported, not
/// asserted.
inline VarianceSensitivity opinion_variance_sensitivity(const ModelParams& params,
                                                        const ParameterShock& shock) {
    params.validate();
    ModelParams shocked = params;
    if (shock.parameter == ParameterShock::Param::tau)
        shocked.tau += shock.delta;
    else
        shocked.h += shock.delta;

    const Partition base = solve_partition(params);
    const Partition post = solve_partition(shocked);
    if (base.n_interior != post.n_interior)
        throw StateCountChanged("shock changes the interior state count");

    VarianceSensitivity v;
    v.d_var = national_opinions(post).variance - national_opinions(base).variance;
    v.state_partials_ok = true;
    for (int n = 1; n <= base.n_interior; ++n) {
        const StateRecord& s = base.state(n);
        const FocPartials p = foc_partials(s.left, s.right, params);
        if (!(-p.f_tau / p.f_s > 0.0) || !(-p.f_h / p.f_s < 0.0)) v.state_partials_ok = false;
    }
    return v;
}

// ===========================================================================
// Separatism
// ===========================================================================

/// Separatism of one sampled locale: sigma = (b_n - t)/S_n in the right
/// hemisphere, the normalized mismatch between the locale's ideal state
/// [t - S_n, t] and its actual state.
struct SeparatismPoint {
    int index = 0;
    double t = 0;
    double sigma = 0;
    double overlap = 0;  ///< Lambda = 1 - sigma
    double ideal_left = 0;
    double ideal_right = 0;
};

/// Samples sigma on every non-polar state; right-hemisphere states are
/// sampled directly and mirrored into the left hemisphere.
inline std::vector<SeparatismPoint> separatism_profile(const Partition& partition,
                                                       int samples_per_state) {
    if (samples_per_state < 2) throw DomainError("separatism needs at least 2 samples");
    std::vector<SeparatismPoint> points;
    for (int n = 1; n <= partition.n_interior; ++n) {
        const StateRecord& s = partition.state(n);
        for (int i = 0; i < samples_per_state; ++i) {
            SeparatismPoint p;
            p.index = n;
            p.t = s.left + s.size * static_cast<double>(i) / (samples_per_state - 1);
            p.sigma = (s.right - p.t) / s.size;
            p.overlap = 1.0 - p.sigma;
            p.ideal_left = p.t - s.size;
            p.ideal_right = p.t;
            points.push_back(p);

            SeparatismPoint q = p;  // mirror image
            q.index = -n;
            q.t = -p.t;
            q.ideal_left = -p.t;
            q.ideal_right = -p.t + s.size;
            points.push_back(q);
        }
    }
    return points;
}

/// Formula-level sensitivity of sigma to tau at fixed offset
/// Delta = t - b_{n-1}: (Delta/S^2) * h / (tau^2 R^(gamma-1)) > 0.
inline double separatism_dsigma_dtau(const Partition& partition, int n, double t) {
    const StateRecord& s = detail::interior_state(partition, n);
    const auto [b_prev, b_n] = detail::mirrored_borders(s);
    const double delta = std::fabs(t) - b_prev;
    if (!(delta >= 0.0 && delta <= s.size)) throw DomainError("t outside state n");
    const double r_pow = std::pow(s.remoteness, partition.params.gamma - 1.0);
    return delta / (s.size * s.size) * partition.params.h /
           (partition.params.tau * partition.params.tau * r_pow);
}

/// Formula-level sensitivity of sigma to remoteness:
/// (Delta/S^2) * h (gamma-1) / (tau R^gamma) > 0.
inline double separatism_dsigma_dR(const Partition& partition, int n, double t) {
    const StateRecord& s = detail::interior_state(partition, n);
    const auto [b_prev, b_n] = detail::mirrored_borders(s);
    const double delta = std::fabs(t) - b_prev;
    if (!(delta >= 0.0 && delta <= s.size)) throw DomainError("t outside state n");
    const double r_pow_g = std::pow(s.remoteness, partition.params.gamma);
    return delta / (s.size * s.size) * partition.params.h * (partition.params.gamma - 1.0) /
           (partition.params.tau * r_pow_g);
}

}  // namespace geoline
