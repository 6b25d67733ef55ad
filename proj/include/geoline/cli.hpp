#pragma once

// Command-line surface: parses arguments, dispatches to the library, emits
// JSON/CSV documents, manages seeds and exit codes. Exit codes: 0 success,
// 1 validation error, 2 numerical failure (infeasible central state,
// state-count change).

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geoline/io.hpp"

namespace geoline {
namespace cli {

inline constexpr const char* kCsvColumnsNote =
    "CSV column orders:\n"
    "  gravity --matrix       exporter,importer,distance,x_newton,x_exact\n"
    "  statics border-effect  b,T\n"
    "  statics stability      index,f_tau,f_s,f_b,dSn_dbprev\n"
    "  statics state0-shock   index,db_db0_fd,dS_db0_fd,dS_dbprev_analytic,"
    "db_db0_chain,F_b_positive\n"
    "  statics separatism     index,t,sigma,overlap,ideal_left,ideal_right\n";

namespace detail {

/// Shared model-parameter options; a partition file may replace them where an
/// operation only needs a solved partition.
struct ParamOpts {
    double tau = 0, h = 0, gamma = 0, alpha = 0, psi = 0;
    double eps_border = 1e-12, eps_size = 1e-6, fd_step = 1e-4;
    bool has_tau = false, has_h = false, has_gamma = false, has_alpha = false, has_psi = false;
    std::string partition_file;

    void add_model_options(CLI::App* cmd) {
        // --h is a model parameter, so help must not claim the -h short flag.
        cmd->set_help_flag("--help", "print help and exit");
        cmd->add_option("--tau", tau, "foreign trade cost per unit distance (> 0)")
            ->each([this](const std::string&) { has_tau = true; });
        cmd->add_option("--h", h, "governance cost per unit state size (> 0)")
            ->each([this](const std::string&) { has_h = true; });
        cmd->add_option("--gamma", gamma, "utility curvature (> 1)")
            ->each([this](const std::string&) { has_gamma = true; });
        cmd->add_option("--alpha", alpha, "land share in production (0 < alpha < 1)")
            ->each([this](const std::string&) { has_alpha = true; });
        cmd->add_option("--psi", psi, "labor marginal-utility scalar (> 0)")
            ->each([this](const std::string&) { has_psi = true; });
        cmd->add_option("--eps-border", eps_border, "border root tolerance [1e-12]");
        cmd->add_option("--eps-size", eps_size, "minimum admissible state size [1e-6]");
        cmd->add_option("--fd-step", fd_step, "relative finite-difference step [1e-4]");
    }

    void add_partition_option(CLI::App* cmd) {
        cmd->add_option("--partition", partition_file,
                        "PartitionDocument JSON to analyze instead of solving");
    }

    ModelParams params() const {
        if (!(has_tau && has_h && has_gamma && has_alpha && has_psi))
            throw ValidationError("missing model parameters: --tau, --h, --gamma, --alpha and "
                                  "--psi are all required (or pass --partition)");
        ModelParams p;
        p.tau = tau;
        p.h = h;
        p.gamma = gamma;
        p.alpha = alpha;
        p.psi = psi;
        p.eps_border = eps_border;
        p.eps_size = eps_size;
        p.fd_step = fd_step;
        p.validate();
        return p;
    }

    Partition partition() const {
        if (!partition_file.empty())
            return io::partition_from_json(io::read_file(partition_file));
        return solve_partition(params());
    }
};

inline void emit(const std::string& doc, const std::string& out_path) {
    if (out_path.empty())
        std::cout << doc;
    else
        io::write_file(out_path, doc);
}

inline ParameterShock make_shock(const std::string& name, double delta) {
    ParameterShock s;
    if (name == "tau")
        s.parameter = ParameterShock::Param::tau;
    else if (name == "h")
        s.parameter = ParameterShock::Param::h;
    else
        throw ValidationError("--param must be 'tau' or 'h'");
    s.delta = delta;
    return s;
}

}  // namespace detail

/// Runs the CLI on the given argument list (excluding the program name).
inline int run(const std::vector<std::string>& args) {
    CLI::App app{"geoline: solver and analysis toolkit for the linear world of "
                 "endogenous state borders"};
    app.set_help_flag("--help", "print help and exit");
    app.footer(kCsvColumnsNote);
    app.require_subcommand(1);

    auto opts = std::make_shared<detail::ParamOpts>();
    auto out_path = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("json");

    std::string doc;

    // -- solve ---------------------------------------------------------
    auto* solve = app.add_subcommand("solve", "solve the equilibrium partition");
    opts->add_model_options(solve);
    solve->add_option("--out", *out_path, "output path (default: stdout)");
    solve->callback([&, opts] { doc = io::to_json(solve_partition(opts->params())); });

    // -- suffrage ------------------------------------------------------
    auto* suffrage =
        app.add_subcommand("suffrage", "solve under the weighted objective U + phi V");
    opts->add_model_options(suffrage);
    auto phi = std::make_shared<double>(0.0);
    suffrage->add_option("--phi", *phi, "labor weight phi (>= 0)")->required();
    suffrage->add_option("--out", *out_path, "output path (default: stdout)");
    suffrage->callback(
        [&, opts, phi] { doc = io::to_json(solve_partition_se(opts->params(), *phi)); });

    // -- gravity -------------------------------------------------------
    auto* gravity = app.add_subcommand("gravity", "bilateral gravity trade flows");
    opts->add_model_options(gravity);
    opts->add_partition_option(gravity);
    auto from = std::make_shared<int>(0);
    auto to = std::make_shared<int>(0);
    auto exact = std::make_shared<bool>(false);
    auto matrix = std::make_shared<bool>(false);
    auto* gfrom = gravity->add_option("--from", *from, "exporter state index");
    auto* gto = gravity->add_option("--to", *to, "importer state index");
    gravity->add_flag("--exact", *exact, "select the exact (pre-approximation) flow");
    gravity->add_flag("--matrix", *matrix, "emit the full trade matrix as CSV");
    gravity->add_option("--out", *out_path, "output path (default: stdout)");
    gravity->callback([&, opts, from, to, exact, matrix, gfrom, gto] {
        const Partition p = opts->partition();
        if (*matrix) {
            doc = io::to_csv(trade_matrix(p));
        } else {
            if (gfrom->count() == 0 || gto->count() == 0)
                throw ValidationError("gravity requires --from and --to (or --matrix)");
            const TradeFlow f =
                *exact ? gravity_exact(p, *from, *to) : gravity_newton(p, *from, *to);
            doc = io::to_json(f, *exact);
        }
    });

    // -- migrate -------------------------------------------------------
    auto* migrate = app.add_subcommand("migrate", "interstate migration flow");
    opts->add_model_options(migrate);
    opts->add_partition_option(migrate);
    migrate->add_option("--from", *from, "source state index (distal)")->required();
    migrate->add_option("--to", *to, "destination state index (proximal)")->required();
    migrate->add_option("--out", *out_path, "output path (default: stdout)");
    migrate->callback(
        [&, opts, from, to] { doc = io::to_json(migration_flow(opts->partition(), *from, *to)); });

    // -- decompose -----------------------------------------------------
    auto* decompose =
        app.add_subcommand("decompose", "decompose a flow change under a parameter shock");
    opts->add_model_options(decompose);
    auto param_name = std::make_shared<std::string>();
    auto delta = std::make_shared<double>(0.0);
    decompose->add_option("--param", *param_name, "shocked parameter: tau | h")->required();
    decompose->add_option("--delta", *delta, "shock size")->required();
    decompose->add_option("--from", *from, "exporter state index")->required();
    decompose->add_option("--to", *to, "importer state index")->required();
    decompose->add_option("--out", *out_path, "output path (default: stdout)");
    decompose->callback([&, opts, param_name, delta, from, to] {
        const ParameterShock shock = detail::make_shock(*param_name, *delta);
        doc = io::to_json(decompose_change(opts->params(), shock, *from, *to), shock, *from, *to);
    });

    // -- statics -------------------------------------------------------
    auto* statics = app.add_subcommand("statics", "comparative statics and ideology measures");
    statics->require_subcommand(1);

    auto* be = statics->add_subcommand("border-effect", "relative border importance profile");
    opts->add_model_options(be);
    opts->add_partition_option(be);
    auto single_b = std::make_shared<double>(-1.0);
    be->add_option("--b", *single_b, "evaluate at a single border coordinate in [0,1)");
    be->add_option("--out", *out_path, "output path (default: stdout)");
    be->callback([&, opts, single_b] {
        if (*single_b >= 0.0) {
            io::detail::Writer w;
            w.object_begin();
            w.field("b", *single_b, true).field("T", border_effect(*single_b));
            w.object_end();
            doc = w.str() + "\n";
        } else {
            const Partition p = opts->partition();
            std::vector<std::pair<double, double>> rows;
            for (int n = 0; n <= p.n_interior; ++n) {
                const double b = p.state(n).right;
                if (b < 1.0) rows.emplace_back(b, border_effect(b));
            }
            doc = io::border_effect_csv(rows);
        }
    });

    auto* stab = statics->add_subcommand("stability", "per-state FOC partials and dh/dtau");
    opts->add_model_options(stab);
    opts->add_partition_option(stab);
    stab->add_option("--out", *out_path, "output path (default: stdout)");
    stab->callback([&, opts] { doc = io::stability_csv(opts->partition()); });

    auto* shock0 = statics->add_subcommand("state0-shock", "propagation of a central shock");
    opts->add_model_options(shock0);
    shock0->add_option("--delta", *delta, "central border shock (|delta| <= 10 fd_step)")
        ->required();
    shock0->add_option("--out", *out_path, "output path (default: stdout)");
    shock0->callback([&, opts, delta] { doc = io::to_csv(state0_shock(opts->params(), *delta)); });

    auto* ovar = statics->add_subcommand("opinion-var", "opinion dispersion sensitivity");
    opts->add_model_options(ovar);
    ovar->add_option("--param", *param_name, "shocked parameter: tau | h")->required();
    ovar->add_option("--delta", *delta, "shock size")->required();
    ovar->add_option("--out", *out_path, "output path (default: stdout)");
    ovar->callback([&, opts, param_name, delta] {
        const ParameterShock shock = detail::make_shock(*param_name, *delta);
        doc = io::to_json(opinion_variance_sensitivity(opts->params(), shock), shock);
    });

    auto* sep = statics->add_subcommand("separatism", "per-locale separatism profile");
    opts->add_model_options(sep);
    opts->add_partition_option(sep);
    auto samples = std::make_shared<int>(16);
    sep->add_option("--samples", *samples, "samples per state (>= 2) [16]");
    sep->add_option("--out", *out_path, "output path (default: stdout)");
    sep->callback(
        [&, opts, samples] { doc = io::to_csv(separatism_profile(opts->partition(), *samples)); });

    // -- verify --------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "numerical equilibrium audit");
    opts->add_model_options(verify);
    opts->add_partition_option(verify);
    auto grid = std::make_shared<double>(1e-3);
    verify->add_option("--grid", *grid, "audit grid step [1e-3]");
    verify->add_option("--out", *out_path, "output path (default: stdout)");
    verify->callback(
        [&, opts, grid] { doc = io::to_json(audit_equilibrium(opts->partition(), *grid)); });

    // -- network -------------------------------------------------------
    auto* network = app.add_subcommand("network", "strategic network formation (arbitrary "
                                                  "geography)");
    network->require_subcommand(1);
    auto config_path = std::make_shared<std::string>();
    auto graph_path = std::make_shared<std::string>();
    auto report_path = std::make_shared<std::string>();
    auto seed_opt = std::make_shared<std::uint64_t>(0);
    auto runs = std::make_shared<std::uint64_t>(0);

    auto* nsim = network->add_subcommand("simulate", "run the activation dynamics");
    nsim->add_option("--config", *config_path, "NetworkConfig JSON")->required();
    auto* nsim_seed = nsim->add_option("--seed", *seed_opt, "override the config seed");
    nsim->add_option("--out", *out_path, "graph output path (default: stdout)");
    nsim->add_option("--report", *report_path, "also write the stability report here");
    nsim->callback([&, config_path, seed_opt, report_path, nsim_seed] {
        NetworkConfig c = io::network_config_from_json(io::read_file(*config_path));
        if (nsim_seed->count() > 0) c.seed = *seed_opt;
        const Graph g = simulate_formation(c);
        doc = io::to_json(g, c);
        const std::string report = io::to_json(check_pairwise_stable(g, c), c);
        if (!report_path->empty())
            io::write_file(*report_path, report);
        else
            std::cout << report;  // report alongside the graph by default
    });

    auto* ncheck = network->add_subcommand("check", "pairwise-stability check of a graph");
    ncheck->add_option("--config", *config_path, "NetworkConfig JSON")->required();
    ncheck->add_option("--graph", *graph_path, "Graph JSON")->required();
    ncheck->add_option("--out", *out_path, "output path (default: stdout)");
    ncheck->callback([&, config_path, graph_path] {
        const NetworkConfig c = io::network_config_from_json(io::read_file(*config_path));
        const Graph g = io::graph_from_json(io::read_file(*graph_path), c);
        doc = io::to_json(check_pairwise_stable(g, c), c);
    });

    auto* nprob = network->add_subcommand("prob", "Monte Carlo equilibrium probabilities");
    nprob->add_option("--config", *config_path, "NetworkConfig JSON")->required();
    nprob->add_option("--runs", *runs, "number of simulation runs (>= 1)")->required();
    auto* nprob_seed = nprob->add_option("--seed", *seed_opt, "override the config seed");
    nprob->add_option("--out", *out_path, "output path (default: stdout)");
    nprob->callback([&, config_path, runs, seed_opt, nprob_seed] {
        NetworkConfig c = io::network_config_from_json(io::read_file(*config_path));
        if (nprob_seed->count() > 0) c.seed = *seed_opt;
        doc = io::to_json(equilibrium_probability(c, *runs), *runs);
    });

    // -- dispatch ------------------------------------------------------
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        detail::emit(doc, *out_path);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace cli
}  // namespace geoline
