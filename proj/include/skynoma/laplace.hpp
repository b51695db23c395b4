#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "skynoma/channel.hpp"
#include "skynoma/config.hpp"
#include "skynoma/geometry.hpp"
#include "skynoma/numerics.hpp"

namespace skynoma {

enum class SourceKind { fixed_line, cox_lines, uav_bpp };

/// One interference source seen from a receiver placed at the origin.
struct InterferenceSourceSpec {
    SourceKind kind = SourceKind::fixed_line;
    double lambda_v = 0.0;    // vehicles per meter of line
    double lambda_l = 0.0;    // lines per meter
    double n_uav = 0.0;       // number of UAVs
    double height_diff = 0.0; // receiver height above the interferer plane (absolute)
    double disk_radius = 1e4; // UAV disk radius
    double extent = 1e4;      // half-length of each line and maximum line distance; may be infinite
    FadingParams fading;
    LosModel los = LosModel::always_los();
};

inline constexpr GainLevel kUnitGain{1.0, 1.0};

/// 1 - (1 + t/m)^(-m), the probability-weighted escape of one interferer
/// under Gamma(m, 1/m) fading, for integer m.
inline double nakagami_kernel(int m, double t) {
    if (!(t > 0.0)) return 0.0;
    if (std::isinf(t)) return 1.0;
    const double q = t / m;
    if (q <= 1.0) {
        // (1+q)^m - 1 by Horner on the binomial expansion; no cancellation.
        double coeff = 1.0;
        double acc = 0.0;
        double qp = 1.0;
        for (int j = 1; j <= m; ++j) {
            coeff = coeff * (m - j + 1) / j;
            qp *= q;
            acc += coeff * qp;
        }
        return acc / (1.0 + acc);
    }
    double base = 1.0 + q;
    double p = 1.0;
    for (int j = 0; j < m; ++j) p *= base;
    return 1.0 - 1.0 / p;
}

namespace detail {

inline double escape(const InterferenceSourceSpec& spec, std::span<const GainLevel> marks, double s,
                     double ground_distance) {
    const double dh = spec.height_diff;
    const double r2 = ground_distance * ground_distance + dh * dh;
    const double plos = p_los(spec.los, ground_distance, dh);
    const auto& f = spec.fading;
    double total = 0.0;
    if (plos > 0.0) {
        const double l = path_loss_sq(r2, f.alpha_los);
        double e = 0.0;
        for (const auto& mk : marks) e += mk.probability * nakagami_kernel(f.m_los, s * mk.gain * l);
        total += plos * e;
    }
    if (plos < 1.0) {
        const double l = path_loss_sq(r2, f.alpha_nlos);
        double e = 0.0;
        for (const auto& mk : marks) e += mk.probability * nakagami_kernel(f.m_nlos, s * mk.gain * l);
        total += (1.0 - plos) * e;
    }
    return total;
}

inline double laplace_marked(const InterferenceSourceSpec& spec, double s, std::span<const GainLevel> marks,
                             const QuadratureSpec& quad) {
    if (s < 0.0 || std::isnan(s)) throw std::invalid_argument("laplace: s must be >= 0");
    if (s == 0.0) return 1.0;
    switch (spec.kind) {
        case SourceKind::fixed_line: {
            if (spec.lambda_v == 0.0) return 1.0;
            const double integral =
                integrate([&](double x) { return escape(spec, marks, s, x); }, 0.0, spec.extent, quad);
            return std::exp(-2.0 * spec.lambda_v * integral);
        }
        case SourceKind::cox_lines: {
            if (spec.lambda_l == 0.0 || spec.lambda_v == 0.0) return 1.0;
            auto per_line = [&](double y) {
                const double inner = integrate(
                    [&](double x) { return escape(spec, marks, s, std::hypot(x, y)); }, 0.0, spec.extent, quad);
                return -std::expm1(-2.0 * spec.lambda_v * inner);
            };
            const double outer = integrate(per_line, 0.0, spec.extent, quad);
            return std::exp(-2.0 * std::numbers::pi * spec.lambda_l * outer);
        }
        case SourceKind::uav_bpp: {
            if (spec.n_uav == 0.0) return 1.0;
            const double L = spec.disk_radius;
            const double mean_escape = integrate(
                [&](double rho) { return escape(spec, marks, s, rho) * 2.0 * rho / (L * L); }, 0.0, L, quad);
            return std::exp(spec.n_uav * std::log1p(-std::min(1.0, mean_escape)));
        }
    }
    return 1.0;
}

}  // namespace detail

/// Laplace transform E[exp(-s I)] of one source, each interferer carrying a
/// gain drawn from `marks`.
///
/// `marked` treats the gain as an independent mark per interferer, the exact
/// form for all three processes. `independent_product` instead multiplies one
/// transform per gain level over a thinned intensity, which coincides with
/// `marked` for the fixed line but not for the Cox or BPP sources.
inline double laplace(const InterferenceSourceSpec& spec, double s, std::span<const GainLevel> marks,
                      Thinning thinning = Thinning::marked, const QuadratureSpec& quad = {}) {
    if (thinning == Thinning::marked || marks.size() <= 1) return detail::laplace_marked(spec, s, marks, quad);
    double product = 1.0;
    for (const auto& mk : marks) {
        if (mk.probability == 0.0) continue;
        InterferenceSourceSpec thinned = spec;
        thinned.lambda_v = spec.kind == SourceKind::uav_bpp ? spec.lambda_v : spec.lambda_v * mk.probability;
        thinned.n_uav = spec.n_uav * mk.probability;
        const GainLevel unit{mk.gain, 1.0};
        product *= detail::laplace_marked(thinned, s, std::span<const GainLevel>(&unit, 1), quad);
    }
    return product;
}

inline double laplace_fixed_line(const InterferenceSourceSpec& spec, double s, const QuadratureSpec& quad = {}) {
    if (spec.kind != SourceKind::fixed_line) throw std::invalid_argument("laplace_fixed_line: wrong source kind");
    return laplace(spec, s, std::span<const GainLevel>(&kUnitGain, 1), Thinning::marked, quad);
}

inline double laplace_cox_lines(const InterferenceSourceSpec& spec, double s, const QuadratureSpec& quad = {}) {
    if (spec.kind != SourceKind::cox_lines) throw std::invalid_argument("laplace_cox_lines: wrong source kind");
    return laplace(spec, s, std::span<const GainLevel>(&kUnitGain, 1), Thinning::marked, quad);
}

inline double laplace_uav_bpp(const InterferenceSourceSpec& spec, double s, const QuadratureSpec& quad = {}) {
    if (spec.kind != SourceKind::uav_bpp) throw std::invalid_argument("laplace_uav_bpp: wrong source kind");
    return laplace(spec, s, std::span<const GainLevel>(&kUnitGain, 1), Thinning::marked, quad);
}

/// LOS-mixture transform: the source's LOS model decides, per interferer
/// distance, the weight of the LOS and NLOS kernels.
inline double laplace_lsm(const InterferenceSourceSpec& spec, double s, const QuadratureSpec& quad = {}) {
    return laplace(spec, s, std::span<const GainLevel>(&kUnitGain, 1), Thinning::marked, quad);
}

/// Product over sources of the beamforming-marked transforms.
inline double laplace_composite(std::span<const InterferenceSourceSpec> specs, const BeamformingConfig& bf, double s,
                                Thinning thinning = Thinning::marked, const QuadratureSpec& quad = {}) {
    const GainDistribution marks = interferer_gain_distribution(bf);
    double product = 1.0;
    for (const auto& spec : specs) product *= laplace(spec, s, marks, thinning, quad);
    return product;
}

/// Aggregate interference at one receiver: every source with the sectored
/// gain marks. Evaluations are memoized on the exact argument.
class ReceiverInterference {
public:
    ReceiverInterference(std::vector<InterferenceSourceSpec> sources, const BeamformingConfig& bf, Thinning thinning,
                         const QuadratureSpec& quad)
        : sources_(std::move(sources)), marks_(interferer_gain_distribution(bf)), thinning_(thinning), quad_(quad) {}

    double operator()(double s) const {
        if (s == 0.0) return 1.0;
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(s); it != cache_.end()) return it->second;
        }
        double product = 1.0;
        for (const auto& src : sources_) {
            product *= laplace(src, s, marks_, thinning_, quad_);
            if (product == 0.0) break;
        }
        std::lock_guard lock(mutex_);
        cache_.emplace(s, product);
        return product;
    }

    /// Spline of log(-log L) against log s, built on first use from exact
    /// evaluations; for integrands that sweep s continuously.
    double tabulated(double s) const {
        if (s <= 0.0) return 1.0;
        std::call_once(table_once_, [this] { build_table(); });
        if (trivial_) return 1.0;
        return std::exp(-std::exp(table_(std::log(s))));
    }

    const std::vector<InterferenceSourceSpec>& sources() const noexcept { return sources_; }
    const GainDistribution& marks() const noexcept { return marks_; }

    static constexpr int kPointsPerDecade = 16;

private:
    // -log L at s = 10^(k / kPointsPerDecade).
    double exponent_at(int k) const {
        const double x = static_cast<double>(k) * std::numbers::ln10 / kPointsPerDecade;
        const double l = (*this)(std::exp(x));
        return l > 0.0 ? -std::log(l) : kInf;
    }

    void build_table() const {
        constexpr double low = 1e-8;    // below: power-law extrapolation
        constexpr double high = 700.0;  // above: L is zero to double precision
        constexpr int decade = kPointsPerDecade;
        constexpr int limit = 160 * decade;
        int k_lo = 0;
        double g = exponent_at(0);
        if (g == 0.0 && exponent_at(10 * decade) == 0.0) {
            trivial_ = true;
            return;
        }
        while (g > low && k_lo > -limit) g = exponent_at(k_lo -= decade);
        int k_hi = 0;
        double prev = exponent_at(0);
        while (k_hi < limit) {
            const double next = exponent_at(k_hi + decade);
            k_hi += decade;
            if (!(next < high) || next - prev <= 1e-12 * next) break;
            prev = next;
        }
        std::vector<double> y;
        for (int k = k_lo; k <= k_hi; ++k) {
            const double v = exponent_at(k);
            if (!(v < kInf)) break;
            y.push_back(std::log(std::max(v, 1e-300)));
        }
        if (y.size() < 2) {
            trivial_ = true;
            return;
        }
        table_ = UniformSpline(static_cast<double>(k_lo) * std::numbers::ln10 / decade, std::numbers::ln10 / decade,
                               std::move(y));
    }

    mutable std::once_flag table_once_;
    mutable UniformSpline table_;
    mutable bool trivial_ = false;
    std::vector<InterferenceSourceSpec> sources_;
    GainDistribution marks_;
    Thinning thinning_;
    QuadratureSpec quad_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<double, double> cache_;
};

/// Interference sources around a receiver of the given kind at the given height.
inline std::vector<InterferenceSourceSpec> sources_at(const SystemConfig& cfg, NodeKind receiver, double height) {
    const FadingParams fading = fading_params(cfg);
    const auto& in = cfg.interference;
    const LosModel vehicle_los = apply_los_mode(classify_link(NodeKind::vehicle, receiver, cfg.channel), cfg.channel.los_mode);
    const LosModel uav_los = apply_los_mode(classify_link(NodeKind::uav, receiver, cfg.channel), cfg.channel.los_mode);
    const double vehicle_dh = std::abs(height - cfg.geometry.h_vehicle);
    const double uav_dh = std::abs(height - in.h_uav);
    const double W = cfg.geometry.window_radius;

    std::vector<InterferenceSourceSpec> out;
    InterferenceSourceSpec line;
    line.kind = SourceKind::fixed_line;
    line.lambda_v = in.lambda_v;
    line.height_diff = vehicle_dh;
    line.extent = W;
    line.fading = fading;
    line.los = vehicle_los;
    out.push_back(line);

    InterferenceSourceSpec cox = line;
    cox.kind = SourceKind::cox_lines;
    cox.lambda_l = in.lambda_l;
    out.push_back(cox);

    InterferenceSourceSpec uav;
    uav.kind = SourceKind::uav_bpp;
    uav.n_uav = in.n_uav;
    uav.height_diff = uav_dh;
    uav.disk_radius = in.disk_radius;
    uav.fading = fading;
    uav.los = uav_los;
    out.push_back(uav);
    return out;
}

}  // namespace skynoma
