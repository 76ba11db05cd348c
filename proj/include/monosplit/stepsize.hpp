#pragma once

// Admissible stepsize ranges ]0, sup[ or ]0, sup] for each scheme.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "monosplit/errors.hpp"

namespace monosplit {

enum class StepsizeRegime { fbs, fbfs, frbs, rfbs_lipschitz, rfbs_cocoercive, srfb };

inline std::string_view to_string(StepsizeRegime r) {
    switch (r) {
        case StepsizeRegime::fbs: return "fbs";
        case StepsizeRegime::fbfs: return "fbfs";
        case StepsizeRegime::frbs: return "frbs";
        case StepsizeRegime::rfbs_lipschitz: return "rfbs_lipschitz";
        case StepsizeRegime::rfbs_cocoercive: return "rfbs_cocoercive";
        case StepsizeRegime::srfb: return "srfb";
    }
    return "unknown";
}

struct StepsizeBound {
    double sup;
    bool inclusive;
    StepsizeRegime regime;

    /// gamma in ]0, sup[ (or ]0, sup] when inclusive).
    bool admits(double gamma) const noexcept {
        if (!(gamma > 0.0)) return false;
        return inclusive ? gamma <= sup : gamma < sup;
    }
};

namespace detail {

inline void require_positive(double v, const char* name) {
    if (!(v > 0.0)) throw InvalidConstantError(std::string(name) + " must be positive");
}

} // namespace detail

inline const double kSqrt2 = std::sqrt(2.0);

/// Tseng forward-backward-forward: ]0, 1/mu[.
inline StepsizeBound stepsize_fbfs(double mu) {
    detail::require_positive(mu, "mu");
    return {1.0 / mu, false, StepsizeRegime::fbfs};
}

/// Forward-reflected-backward: ]0, 1/(2 mu)[.
inline StepsizeBound stepsize_frbs(double mu) {
    detail::require_positive(mu, "mu");
    return {1.0 / (2.0 * mu), false, StepsizeRegime::frbs};
}

/// Reflected forward-backward with a monotone mu-Lipschitz operator: ]0, (sqrt2 - 1)/mu[.
inline StepsizeBound stepsize_rfbs_lipschitz(double mu) {
    detail::require_positive(mu, "mu");
    return {(kSqrt2 - 1.0) / mu, false, StepsizeRegime::rfbs_lipschitz};
}

/// Reflected forward-backward with a beta-cocoercive operator: ]0, beta (1 - eps)/2].
///
/// The supremum over eps is beta/2, but that endpoint is never attained, so
/// eps stays an explicit caller choice.
inline StepsizeBound stepsize_rfbs_cocoercive(double beta, double epsilon) {
    detail::require_positive(beta, "beta");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidConstantError("epsilon must lie in ]0,1[");
    return {beta * (1.0 - epsilon) / 2.0, true, StepsizeRegime::rfbs_cocoercive};
}

/// Semi-reflected forward-backward: the minimum of the four conditions
///   gamma < (1 - zeta)/mu
///   gamma < 4 beta zeta/(1 + xi)
///   gamma < (sqrt2 - 1)/mu
///   gamma < (1 - 2 zeta)/(mu (sqrt2 + 1) + 2/(beta xi))
/// beta = +inf stands for C = 0.
inline StepsizeBound stepsize_srfb(double mu, double beta, double zeta, double xi) {
    detail::require_positive(mu, "mu");
    detail::require_positive(beta, "beta");
    if (!(zeta > 0.0 && zeta < 0.5)) throw InvalidConstantError("zeta must lie in ]0,1/2[");
    if (!(xi > 0.0) || std::isinf(xi)) throw InvalidConstantError("xi must be a positive real");
    const double b1 = (1.0 - zeta) / mu;
    const double b2 = 4.0 * beta * zeta / (1.0 + xi);
    const double b3 = (kSqrt2 - 1.0) / mu;
    const double b4 = (1.0 - 2.0 * zeta) / (mu * (kSqrt2 + 1.0) + 2.0 / (beta * xi));
    return {std::min({b1, b2, b3, b4}), false, StepsizeRegime::srfb};
}

/// Classical forward-backward with a beta-cocoercive operator: ]0, 2 beta[.
inline StepsizeBound stepsize_fbs(double beta) {
    detail::require_positive(beta, "beta");
    return {2.0 * beta, false, StepsizeRegime::fbs};
}

} // namespace monosplit
