#include <catch_amalgamated.hpp>

#include <cmath>

#include "geoline/geopolitics.hpp"
#include "oracles.hpp"

using namespace geoline;
using Catch::Approx;

namespace {

ModelParams canonical() {
    ModelParams p;
    p.tau = 1.0;
    p.h = 0.2;
    p.gamma = 2.0;
    p.alpha = 0.5;
    p.psi = 1.0;
    return p;
}

double foc_value(double b_prev, double b_n, double tau, double h, double gamma) {
    const double a = 1.0 + b_prev;
    const double x = 1.0 - b_n;
    return tau * std::exp(tau * (gamma - 1.0) / 2.0 * (a * a + x * x)) * x - h;
}

}  // namespace

TEST_CASE("border effect") {
    CHECK(border_effect(0.0) == 1.0);
    CHECK(border_effect(0.5) == 3.0);

    const Partition part = solve_partition(canonical());
    const double b1 = part.state(1).right;
    CHECK(border_effect(b1) == Approx((1.0 + b1) / (1.0 - b1)));
    CHECK(border_effect(b1) == Approx(26.78).margin(2e-2));

    SECTION("strictly increasing") {
        double prev = border_effect(0.0);
        for (double b = 0.01; b < 0.995; b += 0.01) {
            const double cur = border_effect(b);
            CHECK(cur > prev);
            prev = cur;
        }
    }
    CHECK_THROWS_AS(border_effect(1.0), DomainError);
    CHECK_THROWS_AS(border_effect(-0.01), DomainError);
}

TEST_CASE("FOC partials match central finite differences") {
    const ModelParams p = canonical();
    const Partition part = solve_partition(p);
    const double step = 1e-6;

    for (int n = 1; n <= part.n_interior; ++n) {
        const StateRecord& s = part.state(n);
        const FocPartials fp = foc_partials(s.left, s.right, p);
        INFO("state " << n);
        CHECK(fp.f_tau > 0.0);
        CHECK(fp.f_s < 0.0);
        CHECK(fp.f_h == -1.0);

        const double b_prev = s.left;
        const double size = s.size;
        const double fd_tau = oracle::central_fd(
            [&](double t) { return foc_value(b_prev, b_prev + size, t, p.h, p.gamma); }, p.tau,
            step);
        const double fd_s = oracle::central_fd(
            [&](double sz) { return foc_value(b_prev, b_prev + sz, p.tau, p.h, p.gamma); }, size,
            step);
        const double fd_b = oracle::central_fd(
            [&](double b) { return foc_value(b, b + size, p.tau, p.h, p.gamma); }, b_prev, step);
        CHECK(fp.f_tau == Approx(fd_tau).epsilon(1e-4));
        CHECK(fp.f_s == Approx(fd_s).epsilon(1e-4));
        CHECK(fp.f_b == Approx(fd_b).epsilon(1e-4));
    }
}

TEST_CASE("stability compensation") {
    const ModelParams p = canonical();
    const Partition part = solve_partition(p);

    SECTION("positive at every interior state; frozen canonical values") {
        CHECK(stability_compensation(part, 1) == Approx(0.4044112877657236).epsilon(1e-10));
        CHECK(stability_compensation(part, 2) == Approx(0.5718267511705167).epsilon(1e-10));
        for (int n = 1; n <= part.n_interior; ++n)
            CHECK(stability_compensation(part, n) > 0.0);
    }
    SECTION("partial in b_n is negative holding b_prev fixed") {
        const StateRecord& s = part.state(1);
        const double eps = 1e-6;
        const double up = foc_partials(s.left, s.right + eps, p).f_tau;
        const double down = foc_partials(s.left, s.right - eps, p).f_tau;
        CHECK(up < down);
    }
    SECTION("boundary zero when the state reaches the world end") {
        const double f_tau = foc_partials(0.0, 1.0, p).f_tau;
        CHECK(f_tau == 0.0);
    }
    SECTION("rejections") {
        CHECK_THROWS_AS(stability_compensation(part, 0), DomainError);
        CHECK_THROWS_AS(stability_compensation(part, part.n_interior + 1), PolarState);
    }
}

TEST_CASE("local size response") {
    const ModelParams p = canonical();
    const Partition part = solve_partition(p);

    SECTION("analytic dS/db_prev matches the re-solve finite difference") {
        const SizeResponse r = local_size_response(part, 1);
        CHECK_FALSE(r.F_b_positive);  // canonical tau is below the threshold
        CHECK_FALSE(r.taurange_holds);

        const double b0 = part.state(0).right;
        const double eps = 1e-6;
        const Partition up = solve_partition_given_b0(p, b0 + eps);
        const Partition down = solve_partition_given_b0(p, b0 - eps);
        const double fd = (up.state(1).size - down.state(1).size) / (2.0 * eps);
        CHECK(r.dSn_dbprev_analytic == Approx(fd).epsilon(1e-4));
    }
    SECTION("F_S < 0 at every interior state") {
        for (int n = 1; n <= part.n_interior; ++n) {
            const StateRecord& s = part.state(n);
            CHECK(foc_partials(s.left, s.right, p).f_s < 0.0);
        }
    }
    SECTION("a large-tau synthetic state has F_b > 0") {
        // (gamma-1) tau (2 b_prev + S)(1 - b_n) > 1 forces the sign.
        ModelParams q = canonical();
        q.tau = 4.0;
        CHECK(foc_partials(0.2, 0.65, q).f_b > 0.0);
    }
}

TEST_CASE("state-0 shocks") {
    const ModelParams p = canonical();

    SECTION("zero shock reports zero differences") {
        const ShockTable t = state0_shock(p, 0.0);
        for (const auto& row : t.rows) {
            CHECK(row.db_db0_fd == 0.0);
            CHECK(row.dS_db0_fd == 0.0);
        }
    }
    SECTION("chain products match finite differences at delta 1e-4") {
        const ShockTable t = state0_shock(p, 1e-4);
        REQUIRE(t.rows.size() == 5);
        double prev_chain = 1.0;  // db_0/db_0
        for (const auto& row : t.rows) {
            INFO("state " << row.index);
            CHECK(row.db_db0_chain == Approx(row.db_db0_fd).epsilon(1e-4));
            CHECK(row.db_db0_chain > 0.0);
            // dS_n/db_0 = (dS_n/db_prev) * (db_{n-1}/db_0)
            CHECK(row.dS_db0_fd ==
                  Approx(row.dS_dbprev_analytic * prev_chain).epsilon(1e-4));
            prev_chain = row.db_db0_chain;
        }
        // frozen oracle value for the first chain product
        CHECK(t.rows.front().db_db0_chain == Approx(0.10223845).epsilon(1e-6));
    }
    SECTION("delta beyond the precondition is rejected") {
        CHECK_THROWS_AS(state0_shock(p, 0.1), DomainError);
    }
}

TEST_CASE("national opinions") {
    const Partition part = solve_partition(canonical());
    const OpinionStats st = national_opinions(part);

    CHECK(st.opinions.at(0) == 0.0);
    CHECK(st.opinions.at(1) == Approx(0.67797065348003551).epsilon(1e-10));
    CHECK(st.mean == 0.0);  // exact mirror cancellation
    CHECK(st.n_per_hemisphere == part.n_interior);
    CHECK(st.variance == Approx(0.85977010149458657).epsilon(1e-10));

    SECTION("opinions mirror exactly") {
        for (const auto& [idx, g] : st.opinions)
            if (idx > 0) CHECK(st.opinions.at(-idx) == -g);
    }
    SECTION("polar semi-states are included per their borders") {
        const int polar = part.n_interior + 1;
        const StateRecord& s = part.state(polar);
        CHECK(st.opinions.at(polar) == Approx(0.5 * (s.left + s.right)));
    }
}

TEST_CASE("opinion variance sensitivity") {
    const ModelParams p = canonical();

    SECTION("zero shock") {
        const VarianceSensitivity v =
            opinion_variance_sensitivity(p, {ParameterShock::Param::tau, 0.0});
        CHECK(v.d_var == 0.0);
        CHECK(v.state_partials_ok);
    }
    SECTION("frozen finite-difference values at +-1e-4") {
        const VarianceSensitivity vt =
            opinion_variance_sensitivity(p, {ParameterShock::Param::tau, 1e-4});
        CHECK(vt.d_var == Approx(1.7025045769e-5).epsilon(1e-5));
        CHECK(vt.state_partials_ok);

        const VarianceSensitivity vh =
            opinion_variance_sensitivity(p, {ParameterShock::Param::h, 1e-4});
        CHECK(vh.d_var == Approx(-3.4961385163e-5).epsilon(1e-5));
        CHECK(vh.state_partials_ok);
    }
    SECTION("state-count guard") {
        CHECK_THROWS_AS(opinion_variance_sensitivity(p, {ParameterShock::Param::h, 1.8}),
                        StateCountChanged);
    }
}

TEST_CASE("separatism profile") {
    const Partition part = solve_partition(canonical());
    const auto points = separatism_profile(part, 5);

    SECTION("affine with exact slope -1/S within each right-hemisphere state") {
        for (int n = 1; n <= part.n_interior; ++n) {
            const StateRecord& s = part.state(n);
            std::vector<const SeparatismPoint*> in_state;
            for (const auto& pt : points)
                if (pt.index == n) in_state.push_back(&pt);
            REQUIRE(in_state.size() == 5);
            CHECK(in_state.front()->sigma == Approx(1.0));
            CHECK(in_state.back()->sigma == Approx(0.0).margin(1e-12));
            for (std::size_t i = 1; i < in_state.size(); ++i) {
                const double ds = in_state[i]->sigma - in_state[i - 1]->sigma;
                const double dt = in_state[i]->t - in_state[i - 1]->t;
                CHECK(ds / dt == Approx(-1.0 / s.size).epsilon(1e-9));
            }
        }
    }
    SECTION("midpoint separatism is one half") {
        const StateRecord& s = part.state(1);
        const auto mid = separatism_profile(part, 3);
        for (const auto& pt : mid)
            if (pt.index == 1 && std::fabs(pt.t - (s.left + s.right) / 2) < 1e-12)
                CHECK(pt.sigma == Approx(0.5));
    }
    SECTION("points mirror into the left hemisphere") {
        int mirrored = 0;
        for (const auto& pt : points)
            if (pt.index < 0) ++mirrored;
        CHECK(mirrored == static_cast<int>(points.size()) / 2);
    }
    SECTION("overlap complements sigma and the ideal state has the actual size") {
        for (const auto& pt : points) {
            CHECK(pt.sigma + pt.overlap == Approx(1.0));
            const double S = part.state(pt.index).size;
            CHECK(pt.ideal_right - pt.ideal_left == Approx(S));
        }
    }
}

TEST_CASE("separatism formula-level sensitivities") {
    const ModelParams p = canonical();
    const Partition part = solve_partition(p);
    const StateRecord& s1 = part.state(1);
    const double t = 0.5 * (s1.left + s1.right);

    const double ds_dtau = separatism_dsigma_dtau(part, 1, t);
    const double ds_dR = separatism_dsigma_dR(part, 1, t);
    CHECK(ds_dtau > 0.0);
    CHECK(ds_dR > 0.0);

    SECTION("cross-checked against S(tau, R) = 1 - b_prev - h/(tau R^(gamma-1))") {
        const double delta = t - s1.left;
        auto sigma_of = [&](double tau, double R) {
            const double size = 1.0 - s1.left - p.h / (tau * std::pow(R, p.gamma - 1.0));
            return (size - delta) / size;
        };
        const double eps = 1e-6;
        const double fd_tau = oracle::central_fd(
            [&](double tau) { return sigma_of(tau, s1.remoteness); }, p.tau, eps);
        const double fd_R = oracle::central_fd(
            [&](double R) { return sigma_of(p.tau, R); }, s1.remoteness, eps);
        CHECK(ds_dtau == Approx(fd_tau).epsilon(1e-4));
        CHECK(ds_dR == Approx(fd_R).epsilon(1e-4));
    }
    SECTION("samples outside the state are rejected") {
        CHECK_THROWS_AS(separatism_dsigma_dtau(part, 1, 0.99), DomainError);
    }
}
