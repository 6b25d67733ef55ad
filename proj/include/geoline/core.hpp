#pragma once

// Primitive types and closed-form building blocks of the linear-world border
// model: model parameters, the remoteness and trade-cost functions, the border
// first-order condition, consumption/utility evaluation and the numeraire
// normalization constants. Everything here is a pure function of its
// arguments; no shared mutable state.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoline {

// ===========================================================================
// Errors
// ===========================================================================

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed inputs: bad parameter values, bad documents, bad CLI arguments.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Arguments outside an operation's domain (inverted borders, unknown state
/// index, coordinates off the world line, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Numerical failure of a solve (infeasible configuration, state-count change
/// under a shock).
class NumericalError : public Error {
  public:
    using Error::Error;
};

class InfeasibleCentralState : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// h_eff equals tau*exp(tau*(gamma-1)) exactly; the model excludes this
/// knife-edge case, so we reject it as a validation error.
class DegenerateEquality : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class StateCountChanged : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class SameState : public DomainError {
  public:
    using DomainError::DomainError;
};

class PolarState : public DomainError {
  public:
    using DomainError::DomainError;
};

class UnknownIndex : public DomainError {
  public:
    using DomainError::DomainError;
};

// ===========================================================================
// Parameters and normalization
// ===========================================================================

/// Primitive constants of the model plus solver tolerances.
struct ModelParams {
    double tau = 0;    ///< foreign trade cost per unit distance, > 0
    double h = 0;      ///< governance disutility per unit state size, > 0
    double gamma = 0;  ///< utility curvature, > 1
    double alpha = 0;  ///< land share in production, in (0,1)
    double psi = 0;    ///< labor marginal-utility scalar, > 0

    double eps_border = 1e-12;  ///< border root tolerance (coordinates)
    double eps_size = 1e-6;     ///< minimum admissible state size
    double fd_step = 1e-4;      ///< relative finite-difference step

    void validate() const {
        if (!(tau > 0)) throw ValidationError("tau must be > 0");
        if (!(h > 0)) throw ValidationError("h must be > 0");
        if (!(gamma > 1)) throw ValidationError("gamma must be > 1");
        if (!(alpha > 0 && alpha < 1)) throw ValidationError("alpha must be in (0,1)");
        if (!(psi > 0)) throw ValidationError("psi must be > 0");
        if (!(eps_border > 0 && eps_size > 0 && fd_step > 0))
            throw ValidationError("tolerances must be > 0");
        if (!(eps_border < eps_size && eps_size < 1))
            throw ValidationError("require eps_border < eps_size < 1");
    }
};

/// Numeraire constants implied by kappa = 1 and p = r z / 2.
struct NormalizationConstants {
    double kappa;         ///< locale GDP, = 1 by convention
    double zeta;          ///< gravity constant, kappa/2
    double p;             ///< factory-gate price, alpha/2
    double y;             ///< locale output, 2/alpha
    double land_income;   ///< r*z = alpha
    double labor_income;  ///< w*l0 = 1 - alpha
    double l0;            ///< initial labor per locale, = 1
};

inline NormalizationConstants normalization(const ModelParams& params) {
    params.validate();
    NormalizationConstants n;
    n.kappa = 1.0;
    n.zeta = 0.5;
    n.p = params.alpha / 2.0;
    n.y = 2.0 / params.alpha;
    n.land_income = params.alpha;
    n.labor_income = 1.0 - params.alpha;
    n.l0 = 1.0;
    return n;
}

// ===========================================================================
// States and partitions
// ===========================================================================

/// One state of the world partition. Index 0 is the central state, +-n the
/// n-th interior state of the right/left hemisphere; polar semi-states carry
/// index +-(n_interior+1) and is_polar = true.
struct StateRecord {
    int index = 0;
    double left = 0;        ///< left border coordinate in [-1,1]
    double right = 0;       ///< right border coordinate in [-1,1]
    double size = 0;        ///< right - left
    double remoteness = 1;  ///< R_n, shared by every locale of the state
    bool is_polar = false;
};

/// Ordered partition of [-1,1] into states, leftmost first.
struct Partition {
    ModelParams params;
    std::vector<StateRecord> states;
    int n_interior = 0;  ///< non-polar states per hemisphere (excluding state 0)
    bool truncated_at_accumulation = false;
    double h_eff = 0;  ///< effective governance cost used (= h for baseline)

    /// State by signed index; throws UnknownIndex.
    const StateRecord& state(int index) const {
        for (const auto& s : states)
            if (s.index == index) return s;
        throw UnknownIndex("no state with index " + std::to_string(index));
    }

    bool has_state(int index) const {
        for (const auto& s : states)
            if (s.index == index) return true;
        return false;
    }

    /// State containing coordinate t. Membership follows the open/closed
    /// border convention: distal borders are open, proximal borders closed,
    /// world ends closed.
    const StateRecord& state_at(double t) const {
        if (!(t >= -1.0 && t <= 1.0))
            throw DomainError("coordinate outside the world line [-1,1]");
        for (const auto& s : states) {
            const bool in = s.index > 0   ? (t >= s.left && t < s.right)
                            : s.index < 0 ? (t > s.left && t <= s.right)
                                          : (t > s.left && t < s.right);
            // World ends are closed and belong to whichever state touches them.
            const bool at_end =
                (t == 1.0 && s.right == 1.0) || (t == -1.0 && s.left == -1.0);
            if (in || at_end) return s;
        }
        throw DomainError("coordinate not covered by the partition");
    }
};

/// Shock to a primitive parameter, used by comparative-statics operations.
struct ParameterShock {
    enum class Param { tau, h };
    Param parameter = Param::tau;
    double delta = 0;
};

// ===========================================================================
// Closed forms
// ===========================================================================

/// Remoteness of a state with the given borders:
/// R = exp(tau/2 * [(1+left)^2 + (1-right)^2]).
inline double remoteness(double left_border, double right_border, const ModelParams& params) {
    if (!(left_border >= -1.0 && right_border <= 1.0 && left_border < right_border))
        throw DomainError("remoteness requires -1 <= left < right <= 1");
    const double a = 1.0 + left_border;
    const double b = 1.0 - right_border;
    return std::exp(params.tau / 2.0 * (a * a + b * b));
}

/// Iceberg trade cost paid at locale t for a good produced at locale s.
/// Costs accrue only beyond the border of t's state nearest to s.
inline double trade_cost(double t, double s, const Partition& partition,
                         const ModelParams& params) {
    const StateRecord& home = partition.state_at(t);
    partition.state_at(s);  // validates coverage of s
    double gap = 0.0;
    if (s < home.left)
        gap = home.left - s;
    else if (s > home.right)
        gap = s - home.right;
    return std::exp(params.tau * gap);
}

/// Residual of the border first-order condition
/// tau * R^(gamma-1) * (1 - b_prev - size) - h_eff, with the state mirrored
/// into right-hemisphere form. size = 0 is allowed and gives the marginal
/// benefit of the first inch, used by the termination test.
inline double foc_residual(double b_prev, double size, double h_eff,
                           const ModelParams& params) {
    if (!(b_prev >= 0.0 && size >= 0.0 && b_prev + size <= 1.0))
        throw DomainError("foc_residual requires 0 <= b_prev, b_prev + size <= 1");
    const double a = 1.0 + b_prev;
    const double x = 1.0 - b_prev - size;
    const double r_pow = std::exp(params.tau * (params.gamma - 1.0) / 2.0 * (a * a + x * x));
    return params.tau * r_pow * x - h_eff;
}

/// Marginal benefit of the first inch of a state grown rightward from b_prev.
/// The central state is feasible iff this exceeds h_eff at b_prev = 0.
inline double central_feasibility_bound(const ModelParams& params) {
    return params.tau * std::exp(params.tau * (params.gamma - 1.0));
}

// ===========================================================================
// Consumption and welfare
// ===========================================================================

/// Consumption and utility of one state's lord and labor, plus the weighted
/// border-setter objective W = U + phi * V.
struct WelfareBundle {
    double c_lord;      ///< C^z = 1/R
    double c_labor;     ///< C^l = ((1-alpha)/alpha)^2 / R
    double u_lord;      ///< U = C^z^(1-gamma)/(1-gamma) - h*S
    double v_labor;     ///< V = psi * C^l^(1-gamma)/(1-gamma)
    double w_weighted;  ///< W = U + phi*V
};

inline WelfareBundle consumption_bundle(const StateRecord& state, const ModelParams& params,
                                        double phi) {
    if (!(state.remoteness > 0)) throw DomainError("state has invalid remoteness");
    if (!(phi >= 0)) throw DomainError("phi must be >= 0");
    WelfareBundle w;
    const double labor_share = (1.0 - params.alpha) / params.alpha;
    w.c_lord = 1.0 / state.remoteness;
    w.c_labor = labor_share * labor_share / state.remoteness;
    const double e = 1.0 - params.gamma;
    w.u_lord = std::pow(w.c_lord, e) / e - params.h * state.size;
    w.v_labor = params.psi * std::pow(w.c_labor, e) / e;
    w.w_weighted = w.u_lord + phi * w.v_labor;
    return w;
}

// ===========================================================================
// Root finding
// ===========================================================================

namespace detail {

/// Bisection on a monotone function with f(lo) and f(hi) of opposite sign.
/// Runs to floating-point exhaustion, so the returned coordinate is accurate
/// to the last representable bit; ModelParams::eps_border is the contractual
/// upper bound on the error. Bracket validity is asserted up front.
template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw NumericalError("bisection bracket does not straddle the root");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

}  // namespace geoline
