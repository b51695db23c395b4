#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <string>

#include "skynoma/errors.hpp"
#include "skynoma/numerics.hpp"
#include "skynoma/outage.hpp"

namespace skynoma {

struct RateIntegralSpec {
    double rel_tol = 1e-6;
    double abs_tol = 1e-10;
    double cap_for_infinite = 30.0;
    double tail_tol = 1e-8;  // integrand bound required where an infinite range is cut
    int max_doublings = 4;
};

inline RateIntegralSpec rate_spec(const SystemConfig& cfg) {
    RateIntegralSpec r;
    r.rel_tol = cfg.numerics.rate_rel_tol;
    r.cap_for_infinite = cfg.numerics.rate_cap;
    return r;
}

/// Rate per unit of log2(1 + SIR) for each scheme: OMA halves the
/// resources, relaying splits them over two slots.
inline double rate_scale(Scheme scheme, Access access) {
    const double slots = scheme == Scheme::dt ? 1.0 : 0.5;
    return access == Access::oma ? 0.5 * slots : slots;
}

struct AarResult {
    double value = 0.0;
    double ceiling = 0.0;       // largest achievable rate; may be infinite
    double upper_limit = 0.0;   // where integration stopped
};

namespace detail {

inline double checked_integrand(double v) {
    if (std::isnan(v) || v < -1e-6 || v > 1.0 + 1e-6)
        throw NonConvergence("rate integrand " + std::to_string(v) + " outside [0,1]");
    return std::clamp(v, 0.0, 1.0);
}

/// Integrates a success-probability profile over [0, ceiling]; an infinite
/// ceiling is cut where the profile has fallen below the tail tolerance.
template <class F>
std::pair<double, double> rate_integral(F&& profile, double ceiling, const RateIntegralSpec& spec,
                                        const QuadratureSpec& base) {
    QuadratureSpec q = base;
    q.rel_tol = spec.rel_tol;
    q.abs_tol = spec.abs_tol;
    auto f = [&](double u) { return checked_integrand(profile(u)); };
    if (std::isfinite(ceiling)) return {ceiling > 0.0 ? integrate(f, 0.0, ceiling, q) : 0.0, ceiling};
    double lo = 0.0;
    double hi = spec.cap_for_infinite;
    double total = 0.0;
    for (int i = 0; i <= spec.max_doublings; ++i) {
        total += integrate(f, lo, hi, q);
        if (f(hi) < spec.tail_tol) return {total, hi};
        lo = hi;
        hi *= 2.0;
    }
    throw NonConvergence("rate integral: success probability still above " + std::to_string(spec.tail_tol) +
                         " at u=" + std::to_string(lo));
}

}  // namespace detail

/// Average achievable rate of `user` under `scheme`/`access`. The rate
/// integrand reads the interference transform from its spline table unless
/// `ev` asks for exact evaluation.
inline AarResult aar(const Analysis& an, Scheme scheme, Access access, User user,
                     Evaluation ev = Evaluation::tabulated) {
    const SystemConfig& cfg = an.config();
    const RateIntegralSpec spec = rate_spec(cfg);
    const SirMap map = access == Access::oma ? kOmaMap : noma_map(cfg.noma, user);
    const double kappa = rate_scale(scheme, access);
    const LinkId sd = user == User::d1 ? LinkId::sd1 : LinkId::sd2;
    const LinkId rd = user == User::d1 ? LinkId::rd1 : LinkId::rd2;
    const double ceiling = kappa * std::log2(1.0 + map.ceiling());
    auto ratio_at = [&](double u) { return map.inverse(std::exp2(u / kappa) - 1.0); };

    AarResult out;
    out.ceiling = ceiling;
    switch (scheme) {
        case Scheme::dt: {
            auto [v, lim] = detail::rate_integral([&](double u) { return an.success(sd, ratio_at(u), ev); }, ceiling,
                                                  spec, cfg.quadrature());
            out.value = v;
            out.upper_limit = lim;
            break;
        }
        case Scheme::rt: {
            auto [v, lim] = detail::rate_integral(
                [&](double u) {
                    const double g = ratio_at(u);
                    return an.success(LinkId::sr, g, ev) * an.success(rd, g, ev);
                },
                ceiling, spec, cfg.quadrature());
            out.value = v;
            out.upper_limit = lim;
            break;
        }
        case Scheme::ht: {
            // Relay decodes at the configured rate; the destination then takes
            // the better of the relayed and direct copies, otherwise the
            // direct retransmission at the doubled-SIR rate.
            const SirThresholds t = sir_thresholds(cfg.noma);
            double g_dec;
            if (access == Access::noma)
                g_dec = user == User::d1 ? t.g1_rt : t.gmax_rt;
            else
                g_dec = kOmaMap.inverse(user == User::d1 ? t.theta1_rt : t.theta2_rt);
            const double p_dec = an.success(LinkId::sr, g_dec);
            auto decoded = [&](double u) {
                const double g = ratio_at(u);
                const double direct = an.success(sd, g, ev);
                const double relayed = an.success(LinkId::sr, std::max(g, g_dec), ev) * an.success(rd, g, ev);
                return p_dec - (1.0 - direct) * (p_dec - relayed);
            };
            auto [v1, lim1] = detail::rate_integral(decoded, ceiling, spec, cfg.quadrature());
            const double ceiling_nd = kappa * std::log2(1.0 + 2.0 * map.ceiling());
            double v2 = 0.0;
            double lim2 = 0.0;
            if (p_dec < 1.0) {
                auto fallback = [&](double u) {
                    return an.success(sd, map.inverse(0.5 * (std::exp2(u / kappa) - 1.0)), ev);
                };
                std::tie(v2, lim2) = detail::rate_integral(fallback, ceiling_nd, spec, cfg.quadrature());
            }
            out.value = v1 + (1.0 - p_dec) * v2;
            out.upper_limit = std::max(lim1, lim2);
            out.ceiling = std::max(ceiling, ceiling_nd);
            break;
        }
    }
    out.value = std::clamp(out.value, 0.0, out.ceiling);
    return out;
}

inline AarResult aar_dt(User user, const SystemConfig& cfg) {
    return aar(Analysis(cfg), Scheme::dt, cfg.access, user);
}
inline AarResult aar_rt(User user, const SystemConfig& cfg) {
    return aar(Analysis(cfg), Scheme::rt, cfg.access, user);
}
inline AarResult aar_ht(User user, const SystemConfig& cfg) {
    return aar(Analysis(cfg), Scheme::ht, cfg.access, user);
}

}  // namespace skynoma
