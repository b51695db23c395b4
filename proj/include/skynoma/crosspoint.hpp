#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "skynoma/config.hpp"
#include "skynoma/errors.hpp"
#include "skynoma/outage.hpp"

namespace skynoma {

enum class CrosspointKind {
    r1c_dt, a1c_dt, r1c_rt, a1c_rt, r1c_ht,
    r2c_dt, a2c_dt, gamma_c_dt, r2c_rt, a2c_rt, gamma_c_rt
};

inline std::string to_string(CrosspointKind k) {
    switch (k) {
        case CrosspointKind::r1c_dt: return "R1c_DT";
        case CrosspointKind::a1c_dt: return "a1c_DT";
        case CrosspointKind::r1c_rt: return "R1c_RT";
        case CrosspointKind::a1c_rt: return "a1c_RT";
        case CrosspointKind::r1c_ht: return "R1c_HT";
        case CrosspointKind::r2c_dt: return "R2c_DT";
        case CrosspointKind::a2c_dt: return "a2c_DT";
        case CrosspointKind::gamma_c_dt: return "gamma_c_DT";
        case CrosspointKind::r2c_rt: return "R2c_RT";
        case CrosspointKind::a2c_rt: return "a2c_RT";
        case CrosspointKind::gamma_c_rt: return "gamma_c_RT";
    }
    return "?";
}

/// Which of D2's two decoding constraints is binding.
enum class BindingBranch { none, g1, g2 };

inline std::string to_string(BindingBranch b) {
    switch (b) {
        case BindingBranch::none: return "-";
        case BindingBranch::g1: return "G1";
        case BindingBranch::g2: return "G2";
    }
    return "?";
}

struct CrosspointResult {
    double value = 0.0;
    CrosspointKind kind = CrosspointKind::r1c_dt;
    bool feasible = true;
    BindingBranch branch = BindingBranch::none;
    // For a2c: the admissible a1 interval (lower from G1, upper from G2).
    double lower = 0.0;
    double upper = 0.0;
};

namespace detail {

// Slots consumed by the scheme: thresholds are 2^(slots*R) - 1 for NOMA and
// 2^(2*slots*R) - 1 for OMA.
inline double scheme_slots(Scheme s) {
    if (s == Scheme::ht) throw InvalidConfig("scheme.type: closed-form cross-points exist for DT and RT only");
    return s == Scheme::dt ? 1.0 : 2.0;
}

inline void check_unit_interval(double v, const char* path) {
    if (!(v > 0.0 && v < 1.0)) throw InvalidConfig(std::string(path) + ": must lie in (0,1)");
}

}  // namespace detail

/// R1 at which NOMA and OMA outage of D1 coincide, given a1.
inline CrosspointResult crosspoint_rate_user1(Scheme scheme, double a1) {
    detail::check_unit_interval(a1, "noma.a1");
    const double k = detail::scheme_slots(scheme);
    const double v = std::log2((1.0 + std::sqrt(1.0 - 4.0 * a1 * (1.0 - a1))) / (2.0 * (1.0 - a1)));
    CrosspointResult r;
    r.kind = scheme == Scheme::dt ? CrosspointKind::r1c_dt : CrosspointKind::r1c_rt;
    r.value = v / k;
    r.feasible = r.value > 0.0;
    return r;
}

/// a1 at which NOMA and OMA outage of D1 coincide, given R1.
inline CrosspointResult crosspoint_power_user1(Scheme scheme, double r1) {
    if (!(r1 > 0.0)) throw InvalidConfig("noma.r1: must be > 0");
    const double k = detail::scheme_slots(scheme);
    const double t1 = std::exp2(k * r1) - 1.0;
    const double theta1 = std::exp2(2.0 * k * r1) - 1.0;
    CrosspointResult r;
    r.kind = scheme == Scheme::dt ? CrosspointKind::a1c_dt : CrosspointKind::a1c_rt;
    r.value = t1 * (1.0 + theta1) / (theta1 * (1.0 + t1));
    r.feasible = r.value > 0.0 && r.value < 1.0;
    return r;
}

/// R2 above which NOMA beats OMA for D2: both max(G1, G2) < Theta2
/// constraints, the larger one binding.
inline CrosspointResult crosspoint_rate_user2(Scheme scheme, double a1, double r1, double gamma) {
    detail::check_unit_interval(a1, "noma.a1");
    if (!(r1 > 0.0)) throw InvalidConfig("noma.r1: must be > 0");
    if (gamma < 0.0 || gamma > 1.0) throw InvalidConfig("noma.gamma: must lie in [0,1]");
    const double k = detail::scheme_slots(scheme);
    const double a2 = 1.0 - a1;
    CrosspointResult r;
    r.kind = scheme == Scheme::dt ? CrosspointKind::r2c_dt : CrosspointKind::r2c_rt;

    // G1 < Theta2  <=>  2^(2kR2) > a1 2^(kR1) / (1 - a2 2^(kR1)).
    const double p = std::exp2(k * r1);
    const double g1_denominator = 1.0 - a2 * p;
    const double from_g1 = g1_denominator > 0.0 ? std::log2(a1 * p / g1_denominator) / (2.0 * k) : kInf;

    // G2 < Theta2  <=>  gamma a1 y^2 - a2 y + a1 (1 - gamma) < 0, y = 2^(kR2).
    const double disc = a2 * a2 - 4.0 * a1 * a1 * gamma * (1.0 - gamma);
    double from_g2 = kInf;
    double g2_upper = kInf;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        const double y_minus = 2.0 * a1 * (1.0 - gamma) / (a2 + root);
        from_g2 = y_minus > 0.0 ? std::log2(y_minus) / k : -kInf;
        if (gamma > 0.0) g2_upper = std::log2((a2 + root) / (2.0 * gamma * a1)) / k;
    }

    r.value = std::max(from_g1, from_g2);
    r.branch = from_g1 >= from_g2 ? BindingBranch::g1 : BindingBranch::g2;
    r.lower = r.value;
    r.upper = g2_upper;
    r.feasible = std::isfinite(r.value) && r.value < g2_upper;
    return r;
}

/// Admissible a1 interval for D2 under NOMA to beat OMA, given R1, R2, gamma.
inline CrosspointResult crosspoint_power_user2(Scheme scheme, double r1, double r2, double gamma) {
    if (!(r1 > 0.0) || !(r2 > 0.0)) throw InvalidConfig("noma.r1/noma.r2: must be > 0");
    if (gamma < 0.0 || gamma > 1.0) throw InvalidConfig("noma.gamma: must lie in [0,1]");
    const double k = detail::scheme_slots(scheme);
    const double t1 = std::exp2(k * r1) - 1.0;
    const double t2 = std::exp2(k * r2) - 1.0;
    const double theta2 = std::exp2(2.0 * k * r2) - 1.0;
    CrosspointResult r;
    r.kind = scheme == Scheme::dt ? CrosspointKind::a2c_dt : CrosspointKind::a2c_rt;
    r.lower = t1 * (1.0 + theta2) / (theta2 * (1.0 + t1));
    r.upper = (theta2 - t2) / (theta2 * (1.0 + gamma * t2));
    r.value = r.upper;
    r.branch = BindingBranch::g2;
    r.feasible = r.lower < r.upper && r.upper > 0.0 && r.lower < 1.0;
    return r;
}

/// Largest SIC residual for which D2's G2 constraint still beats OMA.
inline CrosspointResult crosspoint_gamma(Scheme scheme, double a1, double r2) {
    detail::check_unit_interval(a1, "noma.a1");
    if (!(r2 > 0.0)) throw InvalidConfig("noma.r2: must be > 0");
    const double k = detail::scheme_slots(scheme);
    const double t2 = std::exp2(k * r2) - 1.0;
    const double theta2 = std::exp2(2.0 * k * r2) - 1.0;
    CrosspointResult r;
    r.kind = scheme == Scheme::dt ? CrosspointKind::gamma_c_dt : CrosspointKind::gamma_c_rt;
    r.value = (theta2 - t2 - a1 * theta2) / (a1 * theta2 * t2);
    r.feasible = r.value > 0.0;
    return r;
}

/// Root of f on [lo, hi] by bisection; requires a sign change.
inline std::optional<double> bisect_root(const std::function<double(double)>& f, double lo, double hi,
                                         double tol = 1e-9, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) return std::nullopt;
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// HT has no closed form: search between the RT and DT rate cross-points
/// for the R1 where HT NOMA and HT OMA outage of D1 meet.
inline CrosspointResult crosspoint_rate_user1_ht(const SystemConfig& base, double tol = 1e-6) {
    const double lo = crosspoint_rate_user1(Scheme::rt, base.noma.a1).value;
    const double hi = crosspoint_rate_user1(Scheme::dt, base.noma.a1).value;
    auto diff = [&](double r1) {
        SystemConfig c = base;
        c.noma.r1 = r1;
        Analysis an(c);
        return an.outage(Scheme::ht, Access::noma, User::d1).value -
               an.outage(Scheme::ht, Access::oma, User::d1).value;
    };
    CrosspointResult r;
    r.kind = CrosspointKind::r1c_ht;
    auto root = bisect_root(diff, lo, hi, tol);
    r.feasible = root.has_value();
    r.value = root.value_or(std::nan(""));
    return r;
}

}  // namespace skynoma
