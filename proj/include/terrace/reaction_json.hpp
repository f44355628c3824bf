#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "terrace/error.hpp"
#include "terrace/io.hpp"
#include "terrace/reaction.hpp"

namespace terrace {

namespace detail {

inline Polynomial poly_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array()) fail("ParseError", std::string(what) + " must be an array of coefficients");
    std::vector<double> c;
    for (const auto& v : j) {
        if (!v.is_number()) fail("ParseError", std::string(what) + " coefficient is not a number");
        c.push_back(v.get<double>());
    }
    return Polynomial(std::move(c));
}

inline std::string poly_to_json(const Polynomial& p) {
    const auto c = p.coefficients();
    if (c.empty()) return "[0]";
    return io::num_list(c);
}

}  // namespace detail

/// Reads the reaction document. Accepts either the reaction object itself or a
/// bundle whose `reaction` key holds it.
inline ReactionCandidate parse_reaction(const nlohmann::json& doc) {
    const nlohmann::json& j = doc.contains("reaction") ? doc.at("reaction") : doc;
    for (const char* key : {"steady_states", "segments", "extension_below", "extension_above"}) {
        if (!j.contains(key)) detail::fail("ParseError", std::string("missing key '") + key + "'");
    }
    ReactionCandidate raw;
    for (const auto& s : j.at("steady_states")) {
        if (!s.contains("value") || !s.contains("stability")) {
            detail::fail("ParseError", "steady state needs 'value' and 'stability'");
        }
        const std::string kind = s.at("stability").get<std::string>();
        Stability st;
        if (kind == "stable") {
            st = Stability::Stable;
        } else if (kind == "unstable") {
            st = Stability::Unstable;
        } else {
            detail::fail("ParseError", "stability must be 'stable' or 'unstable', got '" + kind + "'");
        }
        raw.steady_states.emplace_back(s.at("value").get<double>(), st);
    }
    for (const auto& s : j.at("segments")) {
        if (!s.contains("from") || !s.contains("to") || !s.contains("poly")) {
            detail::fail("ParseError", "segment needs 'from', 'to' and 'poly'");
        }
        raw.segments.push_back({s.at("from").get<double>(), s.at("to").get<double>(),
                                detail::poly_from_json(s.at("poly"), "poly")});
    }
    raw.extension_below = detail::poly_from_json(j.at("extension_below"), "extension_below");
    raw.extension_above = detail::poly_from_json(j.at("extension_above"), "extension_above");
    return raw;
}

inline ReactionCandidate parse_reaction(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        detail::fail("ParseError", e.what());
    }
    try {
        return parse_reaction(doc);
    } catch (const nlohmann::json::exception& e) {
        detail::fail("ParseError", e.what());
    }
}

/// Canonical text: fixed key order, states descending, segments ascending,
/// 17-significant-digit numbers.
inline std::string serialize(const ReactionSpec& spec) {
    std::string out = "{\n  \"steady_states\": [\n";
    const auto& st = spec.steady_states();
    for (std::size_t i = 0; i < st.size(); ++i) {
        out += "    {\"value\": " + io::num(st[i].value) + ", \"stability\": \"" + to_string(st[i].stability) + "\"}";
        out += (i + 1 < st.size()) ? ",\n" : "\n";
    }
    out += "  ],\n  \"segments\": [\n";
    const auto& segs = spec.segments();
    for (std::size_t k = 1; k + 1 < segs.size(); ++k) {
        out += "    {\"from\": " + io::num(segs[k].lo) + ", \"to\": " + io::num(segs[k].hi) +
               ", \"poly\": " + detail::poly_to_json(segs[k].poly) + "}";
        out += (k + 2 < segs.size()) ? ",\n" : "\n";
    }
    out += "  ],\n  \"extension_below\": " + detail::poly_to_json(spec.extension_below().poly) + ",\n";
    out += "  \"extension_above\": " + detail::poly_to_json(spec.extension_above().poly) + "\n}\n";
    return out;
}

}  // namespace terrace
