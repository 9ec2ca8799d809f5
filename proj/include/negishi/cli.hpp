#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "negishi/continuation.hpp"
#include "negishi/diagnostics.hpp"
#include "negishi/economy.hpp"
#include "negishi/errors.hpp"
#include "negishi/report.hpp"
#include "negishi/solver.hpp"
#include "negishi/spec_io.hpp"
#include "negishi/time_consistency.hpp"

namespace negishi::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInconsistent = 2,
    kNonConvergence = 3,
    kInvalidInput = 4,
};

/// Largest re-solve deviation that still certifies time consistency.
inline constexpr double kTimeConsistencyTolerance = 1e-8;

struct RunConfig {
    std::string command;
    std::string spec_path;
    std::string output_dir;
    std::string path_csv;  // audit input
    std::optional<double> tol;
    std::optional<double> limit_tol;
    std::string family = "bonds";
    std::optional<double> eps_start;
    std::optional<double> eps_factor;
    std::optional<int> eps_count;
    std::vector<double> direction;
    double decay = 0.5;
};

namespace detail {

inline std::filesystem::path prepare_out(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw ParseError("--out: cannot create output directory '" + cfg.output_dir + "'");
    return dir;
}

inline EconomySpec load_valid(const RunConfig& cfg) {
    auto econ = load_economy(cfg.spec_path);
    require_valid(econ);
    return econ;
}

inline SolveOptions solve_options(const RunConfig& cfg) {
    SolveOptions opt;
    if (cfg.tol) opt.tol = *cfg.tol;
    return opt;
}

inline int report_detector(const EconomySpec& econ, const std::filesystem::path& out, std::ostream& os) {
    const auto rep = zero_bond_feasibility(econ);
    write_file_atomic(out / "consistency.json", consistency_json(rep));
    write_file_atomic(out / "required_rates.csv", required_rates_csv(rep));
    os << "verdict " << verdict_name(rep.verdict) << " rate_spread " << fmt17(rep.rate_spread) << "\n";
    return rep.verdict == Verdict::Consistent ? kSuccess : kInconsistent;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& os) {
    const auto econ = load_valid(cfg);
    const auto out = prepare_out(cfg);
    const auto res = solve_equilibrium(econ, solve_options(cfg));
    write_file_atomic(out / "equilibrium.csv", equilibrium_csv(res));
    write_file_atomic(out / "metadata.json", equilibrium_metadata(res));
    os << "solved: " << res.trace.method << " in " << res.trace.iterations << " steps, budget residual "
       << fmt17(res.trace.final_residual) << "\n";
    return kSuccess;
}

inline int cmd_audit(const RunConfig& cfg, std::ostream& os) {
    if (cfg.path_csv.empty()) throw ParseError("--path: audit needs a path CSV");
    const auto econ = load_valid(cfg);
    const auto out = prepare_out(cfg);
    std::ifstream in(cfg.path_csv);
    if (!in) throw ParseError("--path: cannot read '" + cfg.path_csv + "'");
    std::ostringstream text;
    text << in.rdbuf();
    const auto data = parse_path_csv(text.str(), econ);
    const auto rep = audit(econ, data.allocation, data.prices);
    AuditTolerances tol;
    if (cfg.tol) tol.euler = tol.clearing = tol.budget = *cfg.tol;
    write_file_atomic(out / "residuals.csv", residuals_csv(rep));
    write_file_atomic(out / "audit_summary.json", audit_summary(rep, tol));
    const auto v = judge(rep, tol);
    const auto we = worst_euler(rep);
    os << "audit " << (v.ok() ? "pass" : "fail") << ": worst euler agent " << we.agent << " period " << we.period
       << " value " << fmt17(we.value) << "\n";
    return v.ok() ? kSuccess : kInconsistent;
}

inline int cmd_autarky(const RunConfig& cfg, std::ostream& os) {
    const auto econ = load_valid(cfg);
    const auto out = prepare_out(cfg);
    return report_detector(econ, out, os);
}

inline int cmd_consistency(const RunConfig& cfg, std::ostream& os) {
    const auto econ = load_valid(cfg);
    const auto out = prepare_out(cfg);
    if (econ.regime == BondRegime::ForcedZero) return report_detector(econ, out, os);

    const auto opt = solve_options(cfg);
    const auto eq = solve_equilibrium(econ, opt);
    const auto dev = time_consistency_profile(econ, eq, opt);
    double worst = 0.0;
    std::size_t worst_s = 0;
    for (std::size_t i = 0; i < dev.size(); ++i) {
        if (dev[i] > worst) {
            worst = dev[i];
            worst_s = i + 1;
        }
    }
    const bool ok = worst < kTimeConsistencyTolerance;
    nlohmann::ordered_json doc;
    doc["regime"] = regime_name(econ.regime);
    doc["verdict"] = ok ? "Consistent" : "Inconsistent";
    doc["max_deviation"] = worst;
    doc["worst_restart_period"] = worst_s;
    doc["tolerance"] = kTimeConsistencyTolerance;
    write_file_atomic(out / "time_consistency.csv", time_consistency_csv(dev));
    write_file_atomic(out / "consistency.json", doc.dump(2) + "\n");
    os << "verdict " << (ok ? "Consistent" : "Inconsistent") << " max_deviation " << fmt17(worst) << "\n";
    return ok ? kSuccess : kInconsistent;
}

inline std::vector<double> sweep_parameters(const RunConfig& cfg, const EconomySpec& base) {
    std::vector<double> params;
    if (cfg.family == "horizon") {
        const double start = cfg.eps_start.value_or(static_cast<double>(base.horizon));
        const double factor = cfg.eps_factor.value_or(2.0);
        const int count = cfg.eps_count.value_or(4);
        if (!(factor > 1.0)) throw ValidationError("--eps-factor: horizon growth needs a factor above 1");
        for (int k = 0; k < count; ++k)
            params.push_back(static_cast<double>(std::llround(start * std::pow(factor, k))));
        return params;
    }
    const double start = cfg.eps_start.value_or(1.0);
    const double factor = cfg.eps_factor.value_or(0.5);
    const int count = cfg.eps_count.value_or(13);
    if (!(factor > 0.0 && factor < 1.0)) throw ValidationError("--eps-factor: must lie in (0,1)");
    for (int k = 0; k < count; ++k) params.push_back(start * std::pow(factor, k));
    return params;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& os) {
    const auto base = load_valid(cfg);
    const auto out = prepare_out(cfg);
    const std::size_t n = base.num_agents();

    FamilyKind kind;
    if (cfg.family == "bonds") {
        auto dir = cfg.direction;
        if (dir.empty()) {
            if (n < 2) throw ValidationError("--direction: bond family needs at least two agents");
            dir.assign(n, 0.0);
            dir[0] = 1.0;
            dir[1] = -1.0;
        }
        kind = InitialBondShrink{dir};
    } else if (cfg.family == "endowment") {
        kind = EndowmentPerturbation{cfg.direction.empty() ? std::vector<double>(n, 1.0) : cfg.direction, cfg.decay};
    } else {
        kind = HorizonGrowth{};
    }

    const auto fam = generate_family(base, kind, sweep_parameters(cfg, base));
    const auto run = run_continuation(fam, cfg.limit_tol.value_or(kContinuationTolerance), solve_options(cfg));
    const auto lim = limit_report(run, base);
    write_file_atomic(out / "continuation.csv", continuation_csv(run, lim));
    write_file_atomic(out / "limit.csv", allocation_csv(lim.limit));
    write_file_atomic(out / "metadata.json", continuation_metadata(fam, run, lim));
    os << "sweep " << family_kind_name(fam.kind) << ": " << run.members.size() << " members, converged "
       << (run.converged ? "true" : "false") << ", limit audit " << (lim.verdict.ok() ? "pass" : "fail") << "\n";
    return kSuccess;
}

}  // namespace detail

/// Executes one configured command; every library error maps to its exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command == "solve") return detail::cmd_solve(cfg, out);
        if (cfg.command == "audit") return detail::cmd_audit(cfg, out);
        if (cfg.command == "autarky-check") return detail::cmd_autarky(cfg, out);
        if (cfg.command == "consistency") return detail::cmd_consistency(cfg, out);
        if (cfg.command == "sweep") return detail::cmd_sweep(cfg, out);
        err << "error: unknown command '" << cfg.command << "'\n";
        return kInvalidInput;
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << " (best residual " << fmt17(e.best_residual()) << ")\n";
        return kNonConvergence;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const ConsistencyFault& e) {
        err << "error: internal consistency fault: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidInput;
    }
}

/// Parses argv into a RunConfig and runs it.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Negishi equilibrium workbench for heterogeneous-agent exchange economies"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&cfg](CLI::App* sub) {
        sub->add_option("--spec", cfg.spec_path, "Economy spec file (JSON)")->required();
        sub->add_option("--out", cfg.output_dir, "Output directory")->required();
        sub->add_option("--tol", cfg.tol, "Budget residual tolerance")->check(CLI::PositiveNumber);
    };

    auto* solve = app.add_subcommand("solve", "Solve for the competitive equilibrium");
    common(solve);
    auto* aud = app.add_subcommand("audit", "Audit a consumption/price path against the first-order system");
    common(aud);
    aud->add_option("--path", cfg.path_csv, "Path CSV: period,price,c_0,...")->required();
    auto* autarky = app.add_subcommand("autarky-check", "Detect equilibrium non-existence under zero bonds");
    common(autarky);
    auto* sweep = app.add_subcommand("sweep", "Continuation over a family of neighboring economies");
    common(sweep);
    sweep->add_option("--family", cfg.family, "bonds, endowment or horizon")
        ->check(CLI::IsMember({"bonds", "endowment", "horizon"}));
    sweep->add_option("--eps-start", cfg.eps_start, "First parameter")->check(CLI::PositiveNumber);
    sweep->add_option("--eps-factor", cfg.eps_factor, "Ratio between successive parameters")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--eps-count", cfg.eps_count, "Number of members")->check(CLI::Range(1, 1000));
    sweep->add_option("--direction", cfg.direction, "Per-agent direction a,b,...")->delimiter(',');
    sweep->add_option("--decay", cfg.decay, "Decay of endowment perturbations")->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--limit-tol", cfg.limit_tol, "Continuation convergence tolerance")
        ->check(CLI::PositiveNumber);
    auto* consistency = app.add_subcommand("consistency", "Re-solve from every interior period");
    common(consistency);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidInput;
    }
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    return run(cfg, out, err);
}

}  // namespace negishi::cli
