#ifndef QSCAT_POTENTIAL_HPP
#define QSCAT_POTENTIAL_HPP

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qscat/errors.hpp"
#include "qscat/units.hpp"

namespace qscat {

/// Shape of the ramp h(s) connecting V0 down to 0 over a transition region
/// of width b. Every profile satisfies h(0) = 1, h(b) = 0 and is monotone
/// non-increasing; they differ in smoothness at the junctions:
///   linear       C0
///   smoothstep3  C1  (cubic 1 - (3u^2 - 2u^3))
///   smoothstep5  C2  (quintic 1 - (10u^3 - 15u^4 + 6u^5))
///   cosine       C1  (half-wave (1 + cos(pi u)) / 2)
enum class TransitionProfile { linear, smoothstep3, smoothstep5, cosine };

const char* to_string(TransitionProfile p);
std::optional<TransitionProfile> profile_from_string(std::string_view name);

/// Symmetric compactly supported barrier
///   V(x) = V0                 for |x| <  a
///   V(x) = V0 h(|x| - a)      for a <= |x| <= a+b
///   V(x) = 0                  otherwise
struct BarrierSpec {
    double v0 = 1.0;
    double a = 1.0;
    double b = 0.0;
    TransitionProfile profile = TransitionProfile::smoothstep3;

    double support_half_width() const { return a + b; }

    // v0 = 0 is accepted as the null barrier (free propagation).
    void validate() const;
};

/// h(s) for 0 <= s <= b. Out-of-range s raises domain_error.
double profile_value(TransitionProfile profile, double s, double b);

/// V(x); total function, zero outside the support.
double evaluate_potential(const BarrierSpec& spec, double x);

/// Classical turning distance s0 into the ramp, measured from the outer edge
/// of the plateau: V0 h(s0) = E, so the particle turns at x = -a - s0.
/// Requires 0 < E <= V0 (E == V0 turns exactly at the plateau edge, s0 = 0).
/// Solved by bracketed bisection to |s| tolerance 1e-12 * b.
double turning_point(const BarrierSpec& spec, double E);

void to_json(nlohmann::json& j, const BarrierSpec& spec);
void from_json(const nlohmann::json& j, BarrierSpec& spec);

} // namespace qscat

#endif
