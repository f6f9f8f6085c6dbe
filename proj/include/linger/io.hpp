#pragma once

#include "linger/distributions.hpp"
#include "linger/errors.hpp"
#include "linger/model.hpp"

#include <json.hpp>

#include <string>

namespace linger {

using json = nlohmann::ordered_json;

// Config-record form of a distribution: {"kind": name, <parameters>}. Only
// the parameters of the kind are written.
inline json to_json(const DistributionSpec& d)
{
    json j;
    j["kind"] = kind_name(d.kind);
    switch (d.kind) {
    case DistributionKind::geometric:
        j["p"] = d.p;
        break;
    case DistributionKind::point_mass:
        j["c"] = d.c;
        break;
    case DistributionKind::bernoulli:
        j["p"] = d.p;
        j["c"] = d.c;
        break;
    case DistributionKind::poisson:
        j["lambda"] = d.lambda;
        break;
    case DistributionKind::zeta:
        j["s"] = d.s;
        break;
    }
    return j;
}

namespace detail {

inline double number_at(const json& j, const char* key, const std::string& path)
{
    if (!j.contains(key)) {
        throw ConfigError(path + "." + key + ": missing");
    }
    if (!j[key].is_number()) {
        throw ConfigError(path + "." + key + ": expected a number");
    }
    return j[key].get<double>();
}

}  // namespace detail

/// Parses and validates a distribution record; `path` prefixes error messages.
inline DistributionSpec distribution_from_json(const json& j, const std::string& path)
{
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw ConfigError(path + ": expected an object with a string \"kind\"");
    }
    DistributionSpec d;
    try {
        d.kind = parse_kind(j["kind"].get<std::string>());
    } catch (const ParameterError& e) {
        throw ConfigError(path + ".kind: " + e.what());
    }
    switch (d.kind) {
    case DistributionKind::geometric:
        d.p = detail::number_at(j, "p", path);
        break;
    case DistributionKind::point_mass:
        d.c = detail::number_at(j, "c", path);
        break;
    case DistributionKind::bernoulli:
        d.p = detail::number_at(j, "p", path);
        d.c = j.contains("c") ? detail::number_at(j, "c", path) : 1.0;
        break;
    case DistributionKind::poisson:
        d.lambda = detail::number_at(j, "lambda", path);
        break;
    case DistributionKind::zeta:
        d.s = detail::number_at(j, "s", path);
        break;
    }
    try {
        Distribution check(d);
    } catch (const ParameterError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return d;
}

inline json to_json(Beta beta)
{
    if (beta.is_infinite()) {
        return "inf";
    }
    return beta.value();
}

inline Beta beta_from_json(const json& j, const std::string& path)
{
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") {
            return Beta::infinite();
        }
        throw ConfigError(path + ": the only string value allowed is \"inf\"");
    }
    if (!j.is_number() || !(j.get<double>() > 0.0)) {
        throw ConfigError(path + ": expected a positive number or \"inf\"");
    }
    return Beta(j.get<double>());
}

}  // namespace linger
