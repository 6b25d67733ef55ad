#pragma once

// Interstate migration under free mobility between two states of the same
// hemisphere, with real-wage-equalization verification.

#include <cmath>

#include "geoline/core.hpp"
#include "geoline/solver.hpp"

namespace geoline {

/// Migration between two states. flow > 0 means labor moves from the distal
/// state m toward the proximal state n; residual is the real-wage balance
/// left after substituting the flow back into the equalization condition,
/// with the remoteness ratio taken from the closed form rather than the FOC
/// identity so it doubles as a check of that identity.
struct MigrationResult {
    int from_state = 0;  ///< m (distal)
    int to_state = 0;    ///< n (proximal)
    double flow = 0;     ///< M_{m,n}
    double phi_from = 0; ///< Phi_m
    double phi_to = 0;   ///< Phi_n
    double residual = 0;
};

/// Locational-advantage factor Phi_k = (1 - b_k)^(1/(gamma-1)) of the state
/// whose distal border (mirrored into the right hemisphere) is b_k.
inline double phi_factor(double b_k, double gamma) {
    if (!(b_k >= 0.0 && b_k < 1.0)) throw DomainError("phi_factor requires 0 <= b_k < 1");
    if (!(gamma > 1.0)) throw DomainError("phi_factor requires gamma > 1");
    return std::pow(1.0 - b_k, 1.0 / (gamma - 1.0));
}

/// Equilibrium migration flow between states m and n of the same hemisphere,
/// both with |index| >= 1 and non-polar. Free mobility equalizes real wages:
///   (S_n/S_m) * (S_m - M) / (S_n + M) = R_n / R_m,
/// whose closed-form solution is
///   M = S_m S_n (Phi_n - Phi_m) / (S_n Phi_n + S_m Phi_m).
/// The central state is excluded because its first-order condition differs,
/// so the Phi shortcut does not represent its remoteness ratio.
inline MigrationResult migration_flow(const Partition& partition, int m, int n) {
    if (m == n) throw SameState("migration requires distinct states");
    const StateRecord& sm = partition.state(m);
    const StateRecord& sn = partition.state(n);
    if (sm.is_polar || sn.is_polar)
        throw PolarState("polar semi-states do not participate in migration");
    if (m == 0 || n == 0)
        throw DomainError("migration between state 0 and another state is not defined "
                          "(state 0 obeys a different first-order condition)");
    if ((m > 0) != (n > 0))
        throw DomainError("migration states must lie in the same hemisphere");

    const double gamma = partition.params.gamma;
    const double b_m = std::max(std::fabs(sm.left), std::fabs(sm.right));
    const double b_n = std::max(std::fabs(sn.left), std::fabs(sn.right));
    MigrationResult r;
    r.from_state = m;
    r.to_state = n;
    r.phi_from = phi_factor(b_m, gamma);
    r.phi_to = phi_factor(b_n, gamma);
    r.flow = sm.size * sn.size * (r.phi_to - r.phi_from) /
             (sn.size * r.phi_to + sm.size * r.phi_from);
    // Real-wage balance with L_k = S_k (initial labor normalized to one).
    r.residual = (sn.size / sm.size) * (sm.size - r.flow) / (sn.size + r.flow) -
                 sn.remoteness / sm.remoteness;
    return r;
}

}  // namespace geoline
