#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "skynoma/config.hpp"
#include "skynoma/errors.hpp"
#include "skynoma/geometry.hpp"
#include "skynoma/numerics.hpp"

namespace skynoma {

struct FadingParams {
    int m_los = 2;
    int m_nlos = 1;
    double alpha_los = 2.0;
    double alpha_nlos = 4.0;
};

enum class LosKind { terrestrial, aerial, always_los, always_nlos };

struct LosModel {
    LosKind kind = LosKind::always_los;
    double beta = 0.0;  // per meter, terrestrial
    double a = 0.0;     // aerial sigmoid
    double b = 0.0;     // per degree, aerial

    static LosModel terrestrial(double beta) { return {LosKind::terrestrial, beta, 0.0, 0.0}; }
    static LosModel aerial(double a, double b) { return {LosKind::aerial, 0.0, a, b}; }
    static LosModel always_los() { return {LosKind::always_los, 0.0, 0.0, 0.0}; }
    static LosModel always_nlos() { return {LosKind::always_nlos, 0.0, 0.0, 0.0}; }
};

/// LOS probability from horizontal separation and height difference.
inline double p_los(const LosModel& model, double ground_distance, double height_diff) {
    switch (model.kind) {
        case LosKind::terrestrial:
            return std::exp(-model.beta * std::hypot(ground_distance, height_diff));
        case LosKind::aerial: {
            const double elevation_deg = std::atan2(std::abs(height_diff), ground_distance) * 180.0 / std::numbers::pi;
            return 1.0 / (1.0 + model.a * std::exp(-model.b * (elevation_deg - model.a)));
        }
        case LosKind::always_los: return 1.0;
        case LosKind::always_nlos: return 0.0;
    }
    return 0.0;
}

inline double p_los(const LosModel& model, const Vec3& a, const Vec3& b) {
    return p_los(model, horizontal_distance(a, b), a.z - b.z);
}

inline double path_loss(double dist, double alpha) {
    if (!(dist > 0.0)) throw DegenerateLink("path_loss: zero-length link");
    return std::pow(dist, -alpha);
}

/// r^(-alpha) from the squared distance, with the common exponents done by multiplication.
inline double path_loss_sq(double dist_sq, double alpha) {
    if (alpha == 2.0) return 1.0 / dist_sq;
    if (alpha == 4.0) return 1.0 / (dist_sq * dist_sq);
    if (alpha == 3.0) return 1.0 / (dist_sq * std::sqrt(dist_sq));
    return std::pow(dist_sq, -0.5 * alpha);
}

/// |h|^2 for Nakagami-m fading: Gamma(m, 1/m), unit mean.
inline double sample_fading_power(int m, RngStream& rng) {
    if (m < 1) throw std::invalid_argument("sample_fading_power: m must be >= 1");
    if (m == 1) return rng.exponential(1.0);
    return rng.gamma(static_cast<double>(m), 1.0 / m);
}

/// Propagation class of a link between two node kinds.
inline LosModel classify_link(NodeKind a, NodeKind b, const ChannelConfig& ch) {
    const bool air_a = is_airborne(a);
    const bool air_b = is_airborne(b);
    if (!air_a && !air_b) return LosModel::terrestrial(ch.beta);
    if (air_a && air_b) return LosModel::always_los();
    return LosModel::aerial(ch.los_a, ch.los_b);
}

/// Applies the configured LOS override on top of a geometric class.
inline LosModel apply_los_mode(const LosModel& model, LosMode mode) {
    switch (mode) {
        case LosMode::lsm: return model;
        case LosMode::nlos: return LosModel::always_nlos();
        case LosMode::los: return LosModel::always_los();
    }
    return model;
}

inline FadingParams fading_params(const SystemConfig& cfg) {
    return {cfg.m_los(), cfg.m_nlos(), cfg.channel.alpha_los, cfg.channel.alpha_nlos};
}

struct BeamformingConfig {
    double main_gain = 63.0;
    double side_gain = 0.63;
    double theta_bf = std::numbers::pi / 6.0;  // radians
    double sigma_e = std::numbers::pi / 18.0;  // radians

    void validate() const {
        if (!(side_gain > 0.0) || main_gain < side_gain)
            throw std::invalid_argument("BeamformingConfig: need G >= g > 0");
        if (!(theta_bf > 0.0) || theta_bf > 2.0 * std::numbers::pi)
            throw std::invalid_argument("BeamformingConfig: theta_bf must lie in (0, 2π]");
        if (sigma_e < 0.0) throw std::invalid_argument("BeamformingConfig: sigma_e must be >= 0");
    }
};

inline BeamformingConfig beamforming(const SystemConfig& cfg) {
    return {cfg.beam.main_gain, cfg.beam.side_gain, cfg.theta_bf(), cfg.sigma_e()};
}

struct GainLevel {
    double gain;
    double probability;
};

using GainDistribution = std::array<GainLevel, 3>;

/// Gain of an interfering link: each end points its main lobe at the
/// receiver with probability θ/2π.
inline GainDistribution interferer_gain_distribution(const BeamformingConfig& cfg) {
    const double p = std::min(1.0, cfg.theta_bf / (2.0 * std::numbers::pi));
    const double q = 1.0 - p;
    const double G = cfg.main_gain;
    const double g = cfg.side_gain;
    return {{{G * G, p * p}, {G * g, 2.0 * p * q}, {g * g, q * q}}};
}

/// Probability that one end's steering error stays inside half the beamwidth.
inline double main_link_alignment_prob(const BeamformingConfig& cfg) {
    if (cfg.sigma_e == 0.0) return 1.0;
    if (std::isinf(cfg.sigma_e)) return 0.0;
    return erf((0.5 * cfg.theta_bf) / (std::numbers::sqrt2 * cfg.sigma_e));
}

/// Main-link gain mixture: both ends aligned, one aligned, neither.
inline GainDistribution main_link_gain_distribution(const BeamformingConfig& cfg) {
    const double f = main_link_alignment_prob(cfg);
    const double G = cfg.main_gain;
    const double g = cfg.side_gain;
    return {{{G * G, f * f}, {G * g, 2.0 * f * (1.0 - f)}, {g * g, (1.0 - f) * (1.0 - f)}}};
}

}  // namespace skynoma
