#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "negishi/economy.hpp"
#include "negishi/errors.hpp"

namespace negishi {

// Economy spec files are JSON objects whose keys mirror EconomySpec:
//
//   {
//     "agents": [ { "beta": 0.96, "sigma": 1,
//                   "endowment": { "kind": "Constant", "level": 1.0 } }, ... ],
//     "horizon": 50,
//     "regime": "FreeTrade",            // or "ForcedZero"
//     "initial_bonds": [0.0, 0.0],
//     "price_level": [1.0, ...]          // optional, one entry per period
//   }
//
// Endowment kinds: Constant{level}, Sequence{values}, Perturbed{level, amplitude, decay}.
// Any key outside this schema is rejected.

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ParseError(where + (where.empty() ? "" : ".") + key + ": unknown key");
    }
}

inline const json& require_key(const json& obj, const std::string& key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + (where.empty() ? "" : ".") + key + ": missing required key");
    return *it;
}

inline double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ParseError(field + ": expected a number");
    return v.get<double>();
}

inline std::vector<double> as_numbers(const json& v, const std::string& field) {
    if (!v.is_array()) throw ParseError(field + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

inline EndowmentSpec parse_endowment(const json& v, const std::string& where) {
    if (!v.is_object()) throw ParseError(where + ": expected an object");
    const json& kind = require_key(v, "kind", where);
    if (!kind.is_string()) throw ParseError(where + ".kind: expected a string");
    const auto k = kind.get<std::string>();
    if (k == "Constant") {
        reject_unknown(v, {"kind", "level"}, where);
        return ConstantEndowment{as_number(require_key(v, "level", where), where + ".level")};
    }
    if (k == "Sequence") {
        reject_unknown(v, {"kind", "values"}, where);
        return SequenceEndowment{as_numbers(require_key(v, "values", where), where + ".values")};
    }
    if (k == "Perturbed") {
        reject_unknown(v, {"kind", "level", "amplitude", "decay"}, where);
        return PerturbedEndowment{as_number(require_key(v, "level", where), where + ".level"),
                                  as_number(require_key(v, "amplitude", where), where + ".amplitude"),
                                  as_number(require_key(v, "decay", where), where + ".decay")};
    }
    throw ParseError(where + ".kind: unknown endowment kind '" + k + "'");
}

inline json endowment_to_json(const EndowmentSpec& e) {
    if (const auto* c = std::get_if<ConstantEndowment>(&e)) return {{"kind", "Constant"}, {"level", c->level}};
    if (const auto* s = std::get_if<SequenceEndowment>(&e)) return {{"kind", "Sequence"}, {"values", s->values}};
    const auto& p = std::get<PerturbedEndowment>(e);
    return {{"kind", "Perturbed"}, {"level", p.level}, {"amplitude", p.amplitude}, {"decay", p.decay}};
}

}  // namespace detail

/// Parses an economy spec document. Structural problems raise ParseError naming
/// the field; value-range checks are left to validate_economy.
inline EconomySpec parse_economy(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("spec: top level must be an object");
    detail::reject_unknown(doc, {"agents", "horizon", "regime", "initial_bonds", "price_level"}, "");

    EconomySpec econ;
    const json& agents = detail::require_key(doc, "agents", "");
    if (!agents.is_array()) throw ParseError("agents: expected an array");
    for (std::size_t j = 0; j < agents.size(); ++j) {
        const std::string where = "agents[" + std::to_string(j) + "]";
        const json& a = agents[j];
        if (!a.is_object()) throw ParseError(where + ": expected an object");
        detail::reject_unknown(a, {"beta", "sigma", "endowment"}, where);
        AgentSpec agent;
        agent.beta = detail::as_number(detail::require_key(a, "beta", where), where + ".beta");
        agent.utility.sigma = detail::as_number(detail::require_key(a, "sigma", where), where + ".sigma");
        agent.endowment = detail::parse_endowment(detail::require_key(a, "endowment", where), where + ".endowment");
        econ.agents.push_back(std::move(agent));
    }

    const json& horizon = detail::require_key(doc, "horizon", "");
    if (!horizon.is_number_integer()) throw ParseError("horizon: expected an integer");
    econ.horizon = horizon.get<int>();

    const json& regime = detail::require_key(doc, "regime", "");
    if (!regime.is_string()) throw ParseError("regime: expected a string");
    const auto r = regime.get<std::string>();
    if (r == "FreeTrade") {
        econ.regime = BondRegime::FreeTrade;
    } else if (r == "ForcedZero") {
        econ.regime = BondRegime::ForcedZero;
    } else {
        throw ParseError("regime: expected FreeTrade or ForcedZero, got '" + r + "'");
    }

    econ.initial_bonds = detail::as_numbers(detail::require_key(doc, "initial_bonds", ""), "initial_bonds");
    if (const auto it = doc.find("price_level"); it != doc.end())
        econ.price_level = detail::as_numbers(*it, "price_level");
    return econ;
}

inline EconomySpec load_economy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read spec file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_economy(ss.str());
}

inline std::string economy_to_json(const EconomySpec& econ) {
    using detail::json;
    json doc;
    doc["agents"] = json::array();
    for (const auto& a : econ.agents)
        doc["agents"].push_back(
            {{"beta", a.beta}, {"sigma", a.utility.sigma}, {"endowment", detail::endowment_to_json(a.endowment)}});
    doc["horizon"] = econ.horizon;
    doc["regime"] = regime_name(econ.regime);
    doc["initial_bonds"] = econ.initial_bonds;
    if (!econ.price_level.empty()) doc["price_level"] = econ.price_level;
    return doc.dump(2) + "\n";
}

}  // namespace negishi
