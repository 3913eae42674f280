#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathspace/paths.hpp"

namespace pathspace {

/// Decimal rendering with 17 significant digits, enough for an exact
/// double round-trip through the text form.
inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

namespace detail {

inline void append_array(std::string& out, const std::vector<double>& xs) {
    out += '[';
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += format_number(xs[i]);
    }
    out += ']';
}

} // namespace detail

/// Serializes a path as a single-line JSON object:
///   {"kind":"step"|"pl","horizon":T,"knots":[...],"values":[...]}
/// A step path's breakpoints are stored under "knots" as well. Infinite
/// horizons are written as the string "inf". Tapered paths are an extension
/// ({"kind":"tapered","m":...,"base":{...step...}}).
inline std::string to_json(const AnyPath& path) {
    std::string out;
    if (const StepPath* sp = std::get_if<StepPath>(&path)) {
        out += "{\"kind\":\"step\",\"horizon\":";
        out += sp->infinite_horizon() ? std::string("\"inf\"") : format_number(sp->horizon());
        out += ",\"knots\":";
        detail::append_array(out, sp->breakpoints());
        out += ",\"values\":";
        detail::append_array(out, sp->values());
        out += '}';
    } else if (const PiecewiseLinearPath* pl = std::get_if<PiecewiseLinearPath>(&path)) {
        out += "{\"kind\":\"pl\",\"horizon\":";
        out += format_number(pl->horizon());
        out += ",\"knots\":";
        detail::append_array(out, pl->knots());
        out += ",\"values\":";
        detail::append_array(out, pl->values());
        out += '}';
    } else {
        const TaperedStepPath& tp = std::get<TaperedStepPath>(path);
        out += "{\"kind\":\"tapered\",\"m\":";
        out += format_number(tp.profile().m());
        if (tp.horizon() < tp.profile().m()) {
            out += ",\"horizon\":";
            out += format_number(tp.horizon());
        }
        out += ",\"base\":";
        out += to_json(AnyPath(tp.base()));
        out += '}';
    }
    return out;
}

inline AnyPath path_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) {
        throw std::runtime_error("path JSON: expected an object with a \"kind\" field");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "tapered") {
        AnyPath base = path_from_json(j.at("base"));
        const StepPath* sp = std::get_if<StepPath>(&base);
        if (!sp) throw std::runtime_error("path JSON: tapered base must be a step path");
        TaperedStepPath tapered(*sp, TaperProfile(j.at("m").get<double>()));
        if (j.contains("horizon")) tapered = tapered.restrict(j.at("horizon").get<double>());
        return tapered;
    }
    std::vector<double> knots = j.at("knots").get<std::vector<double>>();
    std::vector<double> values = j.at("values").get<std::vector<double>>();
    if (kind == "step") {
        double horizon;
        const auto& h = j.at("horizon");
        if (h.is_string()) {
            if (h.get<std::string>() != "inf") {
                throw std::runtime_error("path JSON: horizon must be a number or \"inf\"");
            }
            horizon = kInfiniteHorizon;
        } else {
            horizon = h.get<double>();
        }
        return StepPath(std::move(knots), std::move(values), horizon);
    }
    if (kind == "pl") {
        PiecewiseLinearPath p(std::move(knots), std::move(values));
        if (j.contains("horizon")) {
            const double h = j.at("horizon").get<double>();
            if (h != p.horizon()) {
                throw std::runtime_error("path JSON: pl horizon must equal the last knot");
            }
        }
        return p;
    }
    throw std::runtime_error("path JSON: unknown kind \"" + kind + "\"");
}

inline AnyPath path_from_json_text(const std::string& text) {
    return path_from_json(nlohmann::json::parse(text));
}

inline AnyPath load_path(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open path file: " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return path_from_json_text(ss.str());
}

inline void save_path(const AnyPath& path, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write path file: " + file);
    out << to_json(path) << '\n';
}

} // namespace pathspace
