#include "qscat/potential.hpp"

#include <cmath>

namespace qscat {

const char* to_string(TransitionProfile p) {
    switch (p) {
        case TransitionProfile::linear: return "linear";
        case TransitionProfile::smoothstep3: return "smoothstep3";
        case TransitionProfile::smoothstep5: return "smoothstep5";
        case TransitionProfile::cosine: return "cosine";
    }
    return "unknown";
}

std::optional<TransitionProfile> profile_from_string(std::string_view name) {
    if (name == "linear") return TransitionProfile::linear;
    if (name == "smoothstep3") return TransitionProfile::smoothstep3;
    if (name == "smoothstep5") return TransitionProfile::smoothstep5;
    if (name == "cosine") return TransitionProfile::cosine;
    return std::nullopt;
}

void BarrierSpec::validate() const {
    if (!(v0 >= 0.0) || !std::isfinite(v0)) throw config_error("barrier.v0 must be >= 0");
    if (!(a > 0.0) || !std::isfinite(a)) throw config_error("barrier.a must be > 0");
    if (!(b >= 0.0) || !std::isfinite(b)) throw config_error("barrier.b must be >= 0");
}

double profile_value(TransitionProfile profile, double s, double b) {
    if (!(b > 0.0)) throw domain_error("profile_value: transition width b must be > 0");
    if (s < 0.0 || s > b) throw domain_error("profile_value: s outside [0, b]");
    const double u = s / b;
    switch (profile) {
        case TransitionProfile::linear:
            return 1.0 - u;
        case TransitionProfile::smoothstep3:
            return 1.0 - u * u * (3.0 - 2.0 * u);
        case TransitionProfile::smoothstep5:
            return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        case TransitionProfile::cosine:
            return 0.5 * (1.0 + std::cos(M_PI * u));
    }
    return 0.0;
}

double evaluate_potential(const BarrierSpec& spec, double x) {
    const double ax = std::abs(x);
    if (ax < spec.a) return spec.v0;
    if (ax <= spec.a + spec.b && spec.b > 0.0)
        return spec.v0 * profile_value(spec.profile, ax - spec.a, spec.b);
    if (ax == spec.a && spec.b == 0.0) return spec.v0;
    return 0.0;
}

double turning_point(const BarrierSpec& spec, double E) {
    spec.validate();
    if (!(E > 0.0)) throw domain_error("turning_point: E must be > 0");
    if (E > spec.v0) throw domain_error("turning_point: no turning point for E > V0");
    if (E == spec.v0) return 0.0; // h(0) = 1 solves V0 h(s0) = E exactly
    if (spec.b == 0.0) return 0.0;

    // h is monotone non-increasing with h(0) = 1, h(b) = 0, so the root of
    // V0 h(s) - E is bracketed by [0, b]; plain bisection is guaranteed.
    // The classically allowed side of the bracket is returned, keeping
    // E - V0 h(s0) >= 0 for downstream speed evaluations.
    double lo = 0.0, hi = spec.b;
    const double tol = 1e-12 * spec.b;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double f = spec.v0 * profile_value(spec.profile, mid, spec.b) - E;
        if (f > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

void to_json(nlohmann::json& j, const BarrierSpec& spec) {
    j = nlohmann::json{{"v0", spec.v0},
                       {"a", spec.a},
                       {"b", spec.b},
                       {"profile", to_string(spec.profile)}};
}

void from_json(const nlohmann::json& j, BarrierSpec& spec) {
    if (!j.is_object()) throw config_error("barrier must be a JSON object");
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        if (key != "v0" && key != "a" && key != "b" && key != "profile")
            throw config_error("barrier: unknown key '" + key + "'");
    }
    spec.v0 = j.at("v0").get<double>();
    spec.a = j.at("a").get<double>();
    spec.b = j.value("b", 0.0);
    if (j.contains("profile")) {
        const auto name = j.at("profile").get<std::string>();
        const auto p = profile_from_string(name);
        if (!p) throw config_error("barrier.profile: unknown profile '" + name + "'");
        spec.profile = *p;
    }
    spec.validate();
}

} // namespace qscat
