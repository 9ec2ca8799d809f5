#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "negishi/continuation.hpp"
#include "negishi/diagnostics.hpp"
#include "negishi/economy.hpp"
#include "negishi/errors.hpp"
#include "negishi/planner.hpp"
#include "negishi/solver.hpp"

namespace negishi {

/// Fixed numeric formatting for every report: 17 significant digits.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw ParseError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ParseError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

// ---------------------------------------------------------------------------
// Equilibrium
// ---------------------------------------------------------------------------

/// Columns: period, price, interest_rate, c_<j>..., b_<j>... The interest rate
/// cell of the final period is empty (no rate beyond the horizon).
inline std::string equilibrium_csv(const EquilibriumResult& r) {
    const std::size_t n = r.allocation.num_agents();
    std::ostringstream os;
    os << "period,price,interest_rate";
    for (std::size_t j = 0; j < n; ++j) os << ",c_" << j;
    for (std::size_t j = 0; j < n; ++j) os << ",b_" << j;
    os << "\n";
    for (std::size_t t = 0; t < r.allocation.num_periods(); ++t) {
        os << t << "," << fmt17(r.prices.prices[t]) << ",";
        if (t < r.interest_rates.size()) os << fmt17(r.interest_rates[t]);
        for (std::size_t j = 0; j < n; ++j) os << "," << fmt17(r.allocation.consumption[j][t]);
        for (std::size_t j = 0; j < n; ++j) os << "," << fmt17(r.bonds[j][t]);
        os << "\n";
    }
    return os.str();
}

namespace detail {

inline nlohmann::ordered_json residual_norms(const ResidualReport& rep) {
    return {{"max_euler", rep.max_euler()},
            {"max_clearing", rep.max_clearing()},
            {"max_budget", rep.max_budget()},
            {"max_mu_ratio_drift", rep.max_drift()}};
}

inline nlohmann::ordered_json pair_table(const ResidualReport& rep) {
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < rep.pairs.size(); ++p)
        arr.push_back({{"j", rep.pairs[p].first},
                       {"k", rep.pairs[p].second},
                       {"mu_ratio_drift", rep.mu_ratio_drift[p]},
                       {"implied_gamma", rep.implied_gamma[p]}});
    return arr;
}

}  // namespace detail

inline std::string equilibrium_metadata(const EquilibriumResult& r) {
    nlohmann::ordered_json doc;
    doc["weights"] = r.weights.values();
    doc["residuals"] = detail::residual_norms(r.residuals);
    doc["budget_residuals"] = r.residuals.budget;
    doc["pairs"] = detail::pair_table(r.residuals);
    double terminal = 0.0;
    for (const auto& row : r.bonds) terminal = std::max(terminal, std::abs(row.back()));
    doc["max_terminal_bond"] = terminal;
    doc["solver"] = {{"method", r.trace.method},
                     {"iterations", r.trace.iterations},
                     {"final_residual", r.trace.final_residual}};
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

/// Columns: period, clearing, euler_<j>...; Euler cells of the final period are empty.
inline std::string residuals_csv(const ResidualReport& rep) {
    std::ostringstream os;
    os << "period,clearing";
    for (std::size_t j = 0; j < rep.euler.size(); ++j) os << ",euler_" << j;
    os << "\n";
    for (std::size_t t = 0; t < rep.clearing.size(); ++t) {
        os << t << "," << fmt17(rep.clearing[t]);
        for (const auto& row : rep.euler) {
            os << ",";
            if (t < row.size()) os << fmt17(row[t]);
        }
        os << "\n";
    }
    return os.str();
}

inline std::string audit_summary(const ResidualReport& rep, const AuditTolerances& tol) {
    const auto v = judge(rep, tol);
    const auto we = worst_euler(rep);
    const auto wc = worst_clearing(rep);
    const auto wb = worst_budget(rep);
    nlohmann::ordered_json doc;
    doc["verdict"] = v.ok() ? "pass" : "fail";
    doc["gates"] = {{"euler", v.euler_ok}, {"clearing", v.clearing_ok}, {"budget", v.budget_ok}, {"mu_ratio_drift", v.drift_ok}};
    doc["tolerances"] = {{"euler", tol.euler}, {"clearing", tol.clearing}, {"budget", tol.budget}, {"mu_ratio_drift", tol.drift}};
    doc["residuals"] = detail::residual_norms(rep);
    doc["worst"] = {{"euler", {{"agent", we.agent}, {"period", we.period}, {"value", we.value}}},
                    {"clearing", {{"period", wc.period}, {"value", wc.value}}},
                    {"budget", {{"agent", wb.agent}, {"value", wb.value}}}};
    doc["budget_residuals"] = rep.budget;
    doc["pairs"] = detail::pair_table(rep);
    return doc.dump(2) + "\n";
}

struct PathData {
    Allocation allocation;
    PricePath prices;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline double parse_cell(const std::string& cell, const std::string& where) {
    if (cell.empty()) throw ParseError(where + ": empty cell");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw ParseError(where + ": not a number '" + cell + "'");
    }
    if (used != cell.size()) throw ParseError(where + ": not a number '" + cell + "'");
    return v;
}

}  // namespace detail

/// Reads `period, price, c_<agent>, ...` with one row per period 0..T of `econ`.
inline PathData parse_path_csv(const std::string& text, const EconomySpec& econ) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("path csv: empty input");
    const auto header = detail::split_csv_line(line);
    const std::size_t n = econ.num_agents();
    if (header.size() != n + 2 || header[0] != "period" || header[1] != "price")
        throw ParseError("path csv: header must be period,price,c_0..c_" + std::to_string(n - 1));
    for (std::size_t j = 0; j < n; ++j)
        if (header[j + 2] != "c_" + std::to_string(j))
            throw ParseError("path csv: column " + std::to_string(j + 2) + " must be c_" + std::to_string(j));

    PathData d;
    d.allocation.consumption.assign(n, {});
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = detail::split_csv_line(line);
        const std::string where = "path csv row " + std::to_string(row + 1);
        if (cells.size() != n + 2) throw ParseError(where + ": expected " + std::to_string(n + 2) + " cells");
        const double period = detail::parse_cell(cells[0], where + " period");
        if (period != static_cast<double>(row))
            throw ParseError(where + ": period " + cells[0] + " out of sequence, expected " + std::to_string(row));
        const std::string at = where + " (period " + std::to_string(row) + ")";
        const double price = detail::parse_cell(cells[1], at + " price");
        if (!(price > 0.0)) throw ParseError(at + ": price must be positive");
        d.prices.prices.push_back(price);
        for (std::size_t j = 0; j < n; ++j) {
            const double c = detail::parse_cell(cells[j + 2], at + " c_" + std::to_string(j));
            if (!(c > 0.0)) throw ParseError(at + ": c_" + std::to_string(j) + " must be positive");
            d.allocation.consumption[j].push_back(c);
        }
        ++row;
    }
    if (row != econ.num_periods())
        throw ParseError("path csv: " + std::to_string(row) + " rows, economy has " +
                         std::to_string(econ.num_periods()) + " periods");
    d.prices.price_level = price_levels(econ);
    return d;
}

inline std::string path_csv(const Allocation& a, const PricePath& p) {
    std::ostringstream os;
    os << "period,price";
    for (std::size_t j = 0; j < a.num_agents(); ++j) os << ",c_" << j;
    os << "\n";
    for (std::size_t t = 0; t < a.num_periods(); ++t) {
        os << t << "," << fmt17(p.prices[t]);
        for (const auto& row : a.consumption) os << "," << fmt17(row[t]);
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Detector, time consistency, continuation
// ---------------------------------------------------------------------------

inline std::string consistency_json(const ConsistencyReport& rep) {
    nlohmann::ordered_json doc;
    doc["regime"] = regime_name(rep.regime);
    doc["verdict"] = verdict_name(rep.verdict);
    doc["required_rates"] = rep.required_rates;
    doc["rate_spread"] = rep.rate_spread;
    doc["worst_period"] = rep.worst_period;
    doc["tolerance"] = rep.tolerance;
    auto pairs = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < rep.pairs.size(); ++p)
        pairs.push_back({{"j", rep.pairs[p].first}, {"k", rep.pairs[p].second}, {"drift_per_period", rep.drift_per_period[p]}});
    doc["pairs"] = pairs;
    return doc.dump(2) + "\n";
}

/// Columns: period, required_rate_<j>...
inline std::string required_rates_csv(const ConsistencyReport& rep) {
    std::ostringstream os;
    os << "period";
    for (std::size_t j = 0; j < rep.required_rate_path.size(); ++j) os << ",required_rate_" << j;
    os << "\n";
    const std::size_t periods = rep.required_rate_path.empty() ? 0 : rep.required_rate_path.front().size();
    for (std::size_t t = 0; t < periods; ++t) {
        os << t;
        for (const auto& row : rep.required_rate_path) os << "," << fmt17(row[t]);
        os << "\n";
    }
    return os.str();
}

inline std::string time_consistency_csv(const std::vector<double>& deviations) {
    std::ostringstream os;
    os << "restart_period,max_deviation\n";
    for (std::size_t i = 0; i < deviations.size(); ++i) os << i + 1 << "," << fmt17(deviations[i]) << "\n";
    return os.str();
}

/// One row per member: parameter, residual norms, bond sup, diff to previous (empty for the first).
inline std::string continuation_csv(const ContinuationRun& run, const LimitSummary& lim) {
    std::ostringstream os;
    os << "member,parameter,max_euler,max_clearing,max_budget,bond_sup,diff_to_previous\n";
    for (std::size_t i = 0; i < run.members.size(); ++i) {
        const auto& r = run.members[i].equilibrium.residuals;
        os << i << "," << fmt17(run.members[i].parameter) << "," << fmt17(r.max_euler()) << ","
           << fmt17(r.max_clearing()) << "," << fmt17(r.max_budget()) << "," << fmt17(lim.member_bond_sup[i]) << ",";
        if (i > 0) os << fmt17(run.diffs[i - 1]);
        os << "\n";
    }
    return os.str();
}

inline std::string allocation_csv(const Allocation& a) {
    std::ostringstream os;
    os << "period";
    for (std::size_t j = 0; j < a.num_agents(); ++j) os << ",c_" << j;
    os << "\n";
    for (std::size_t t = 0; t < a.num_periods(); ++t) {
        os << t;
        for (const auto& row : a.consumption) os << "," << fmt17(row[t]);
        os << "\n";
    }
    return os.str();
}

inline std::string continuation_metadata(const EconomyFamily& fam, const ContinuationRun& run, const LimitSummary& lim) {
    nlohmann::ordered_json doc;
    doc["family"] = family_kind_name(fam.kind);
    doc["parameters"] = fam.parameters;
    doc["window"] = run.window;
    doc["diffs"] = run.diffs;
    doc["ratio_estimates"] = run.ratio_estimates;
    doc["monotone"] = run.monotone;
    doc["extrapolated"] = run.extrapolated;
    doc["converged"] = run.converged;
    doc["tolerance"] = run.tolerance;
    doc["limit"] = {{"audit_verdict", lim.verdict.ok() ? "pass" : "fail"},
                    {"residuals", detail::residual_norms(lim.audit)},
                    {"mu_ratio_drift", lim.max_drift},
                    {"bond_sup", lim.limit_bond_sup},
                    {"autarky_gap", lim.autarky_gap},
                    {"base_forced_zero", lim.base_forced_zero},
                    {"satisfies_forced_constraint", lim.satisfies_forced_constraint}};
    return doc.dump(2) + "\n";
}

}  // namespace negishi
