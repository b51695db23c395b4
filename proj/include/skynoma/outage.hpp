#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <map>
#include <memory>
#include <string>

#include "skynoma/channel.hpp"
#include "skynoma/config.hpp"
#include "skynoma/geometry.hpp"
#include "skynoma/laplace.hpp"
#include "skynoma/numerics.hpp"

namespace skynoma {

/// SIR as a function of the normalized link ratio X = K|h|^2 l / I:
/// SIR = signal * X / (self * X + 1).
struct SirMap {
    double signal = 1.0;
    double self = 0.0;

    double sir(double x) const {
        if (std::isinf(x)) return self > 0.0 ? signal / self : kInf;
        return signal * x / (self * x + 1.0);
    }
    /// Smallest X reaching SIR >= threshold; infinite when unreachable.
    double inverse(double threshold) const {
        if (threshold <= 0.0) return 0.0;
        const double denom = signal - self * threshold;
        if (denom <= 1e-12 * signal) return kInf;
        return threshold / denom;
    }
    double ceiling() const { return self > 0.0 ? signal / self : kInf; }
};

/// Map for decoding user `u`'s own message under NOMA.
inline SirMap noma_map(const NomaConfig& n, User u) {
    return u == User::d1 ? SirMap{n.a1, n.a2} : SirMap{n.a2, n.gamma * n.a1};
}
inline constexpr SirMap kOmaMap{1.0, 0.0};

struct SirThresholds {
    double t1, t2, t1_rt, t2_rt;
    double theta1, theta2, theta1_rt, theta2_rt;
    double g1, g2, gmax;
    double g1_rt, g2_rt, gmax_rt;
    double g1_half, g2_half, z;  // RT thresholds halved, used by HT's direct fallback
};

inline SirThresholds sir_thresholds(const NomaConfig& n) {
    SirThresholds t{};
    const SirMap m1 = noma_map(n, User::d1);
    const SirMap m2 = noma_map(n, User::d2);
    t.t1 = std::exp2(n.r1) - 1.0;
    t.t2 = std::exp2(n.r2) - 1.0;
    t.t1_rt = std::exp2(2.0 * n.r1) - 1.0;
    t.t2_rt = std::exp2(2.0 * n.r2) - 1.0;
    t.theta1 = std::exp2(2.0 * n.r1) - 1.0;
    t.theta2 = std::exp2(2.0 * n.r2) - 1.0;
    t.theta1_rt = std::exp2(4.0 * n.r1) - 1.0;
    t.theta2_rt = std::exp2(4.0 * n.r2) - 1.0;
    t.g1 = m1.inverse(t.t1);
    t.g2 = m2.inverse(t.t2);
    t.gmax = std::max(t.g1, t.g2);
    t.g1_rt = m1.inverse(t.t1_rt);
    t.g2_rt = m2.inverse(t.t2_rt);
    t.gmax_rt = std::max(t.g1_rt, t.g2_rt);
    t.g1_half = m1.inverse(0.5 * t.t1_rt);
    t.g2_half = m2.inverse(0.5 * t.t2_rt);
    t.z = std::max(t.g1_half, t.g2_half);
    return t;
}

/// Rates beyond which a user is in outage for every channel realization.
struct OutageRates {
    double d1_dt, d1_rt, d1_ht;
    double d2_dt, d2_rt, d2_ht;
};

inline OutageRates outage_rate_thresholds(const NomaConfig& n) {
    const double r1 = n.a1 / n.a2;
    const double r2 = n.gamma > 0.0 ? n.a2 / (n.gamma * n.a1) : kInf;
    return {std::log2(1.0 + r1), 0.5 * std::log2(1.0 + r1), 0.5 * std::log2(1.0 + 2.0 * r1),
            std::log2(1.0 + r2), 0.5 * std::log2(1.0 + r2), 0.5 * std::log2(1.0 + 2.0 * r2)};
}

/// LOS mixture of two per-state outage probabilities.
inline double op_with_lsm(double p_los_value, double op_los, double op_nlos) {
    return p_los_value * op_los + (1.0 - p_los_value) * op_nlos;
}

/// Steering-error mixture over the three main-link gain levels.
inline double op_total(const GainDistribution& main_gains, const std::array<double, 3>& branch_ops) {
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) total += main_gains[i].probability * branch_ops[i];
    return total;
}

/// Outage of one fading state via Alzer's bound: P(|h|^2 < x) ~ (1 - e^{-c m x})^m,
/// averaged over interference, for threshold X >= ratio with `scale` = ratio / (K l).
template <class Laplace>
double alzer_outage(int m, const Laplace& laplace_of, double scale) {
    const double c = alzer_constant(m);
    double sum = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double term = binomial(m, k) * laplace_of(c * k * m * scale);
        sum += (k % 2 == 0) ? term : -term;
    }
    return sum;
}

inline double clamp_probability(double p, const char* what) {
    if (std::isnan(p) || p < -1e-6 || p > 1.0 + 1e-6)
        throw NonConvergence(std::string(what) + ": probability " + std::to_string(p) + " outside [0,1]");
    return std::clamp(p, 0.0, 1.0);
}

enum class LinkId { sd1, sd2, sr, rd1, rd2 };
inline constexpr std::array<LinkId, 5> kAllLinks{LinkId::sd1, LinkId::sd2, LinkId::sr, LinkId::rd1, LinkId::rd2};

inline std::string to_string(LinkId id) {
    switch (id) {
        case LinkId::sd1: return "SD1";
        case LinkId::sd2: return "SD2";
        case LinkId::sr: return "SR";
        case LinkId::rd1: return "RD1";
        case LinkId::rd2: return "RD2";
    }
    return "?";
}

/// One intended link with its geometry and propagation class.
struct LinkSpec {
    Node tx;
    Node rx;
    LosModel los;

    double distance() const { return skynoma::distance(tx.position, rx.position); }
    double ground_distance() const { return horizontal_distance(tx.position, rx.position); }
    double height_diff() const { return tx.position.z - rx.position.z; }
};

inline LinkSpec make_link(const Node& tx, const Node& rx, const SystemConfig& cfg) {
    return {tx, rx, apply_los_mode(classify_link(tx.kind, rx.kind, cfg.channel), cfg.channel.los_mode)};
}

inline LinkSpec link_of(const Deployment& d, LinkId id, const SystemConfig& cfg) {
    switch (id) {
        case LinkId::sd1: return make_link(d.source, d.d1, cfg);
        case LinkId::sd2: return make_link(d.source, d.d2, cfg);
        case LinkId::sr: return make_link(d.source, d.relay, cfg);
        case LinkId::rd1: return make_link(d.relay, d.d1, cfg);
        case LinkId::rd2: return make_link(d.relay, d.d2, cfg);
    }
    throw std::logic_error("link_of: bad link id");
}

struct OutageResult {
    double value = 0.0;
    bool full_outage = false;
};

/// How link success probabilities evaluate the interference transform.
enum class Evaluation { exact, tabulated };

/// Analytical engine for one scenario. Success probabilities of each link
/// are the steering and LOS mixtures of the Alzer expansion over the
/// receiver's aggregate interference transform.

class Analysis {
public:
    explicit Analysis(SystemConfig cfg) : cfg_(std::move(cfg)) {
        validate(cfg_);
        deployment_ = build_deployment(cfg_);
        bf_ = beamforming(cfg_);
        main_gains_ = main_link_gain_distribution(bf_);
        fading_ = fading_params(cfg_);
        for (LinkId id : kAllLinks) {
            links_[static_cast<std::size_t>(id)] = link_of(deployment_, id, cfg_);
        }
    }

    const SystemConfig& config() const noexcept { return cfg_; }
    const Deployment& deployment() const noexcept { return deployment_; }
    const LinkSpec& link(LinkId id) const { return links_[static_cast<std::size_t>(id)]; }

    /// Aggregate interference transform at the receiver of `id`.
    const ReceiverInterference& interference(LinkId id) const {
        const Node& rx = link(id).rx;
        const auto key = std::make_pair(static_cast<int>(rx.kind), rx.position.z);
        std::lock_guard lock(mutex_);
        auto it = receivers_.find(key);
        if (it == receivers_.end()) {
            auto ri = std::make_shared<ReceiverInterference>(sources_at(cfg_, rx.kind, rx.position.z), bf_,
                                                             cfg_.thinning, cfg_.quadrature());
            it = receivers_.emplace(key, std::move(ri)).first;
        }
        return *it->second;
    }

    /// Fading-state outage for one main-link gain `main_gain` and state.
    double state_outage(LinkId id, double ratio, double main_gain, bool los,
                        Evaluation ev = Evaluation::exact) const {
        const LinkSpec& l = link(id);
        const double d = l.distance();
        if (!(d > 0.0)) throw DegenerateLink("link " + to_string(id) + " has zero length");
        const int m = los ? fading_.m_los : fading_.m_nlos;
        const double alpha = los ? fading_.alpha_los : fading_.alpha_nlos;
        const double path = path_loss(d, alpha);
        const ReceiverInterference& h = interference(id);
        const double scale = ratio / (main_gain * path);
        if (ev == Evaluation::tabulated) return alzer_outage(m, [&](double s) { return h.tabulated(s); }, scale);
        return alzer_outage(m, h, scale);
    }

    /// P(X > ratio) on link `id`.
    double success(LinkId id, double ratio, Evaluation ev = Evaluation::exact) const {
        if (ratio <= 0.0) return 1.0;
        if (std::isinf(ratio)) return 0.0;
        const LinkSpec& l = link(id);
        const double plos = p_los(l.los, l.tx.position, l.rx.position);
        std::array<double, 3> branch{};
        for (std::size_t b = 0; b < 3; ++b) {
            if (main_gains_[b].probability == 0.0) continue;
            const double K = main_gains_[b].gain;
            const double op_los = plos > 0.0 ? state_outage(id, ratio, K, true, ev) : 0.0;
            const double op_nlos = plos < 1.0 ? state_outage(id, ratio, K, false, ev) : 0.0;
            branch[b] = op_with_lsm(plos, op_los, op_nlos);
        }
        return clamp_probability(1.0 - op_total(main_gains_, branch), "link success");
    }

    OutageResult outage(Scheme scheme, Access access, User user) const {
        const SirThresholds t = sir_thresholds(cfg_.noma);
        const LinkId sd = user == User::d1 ? LinkId::sd1 : LinkId::sd2;
        const LinkId rd = user == User::d1 ? LinkId::rd1 : LinkId::rd2;
        double g_direct;  // DT threshold
        double g_relay;   // RT threshold, each hop
        double g_half;    // HT direct fallback
        if (access == Access::noma) {
            g_direct = user == User::d1 ? t.g1 : t.gmax;
            g_relay = user == User::d1 ? t.g1_rt : t.gmax_rt;
            g_half = user == User::d1 ? t.g1_half : t.z;
        } else {
            const double theta = user == User::d1 ? t.theta1 : t.theta2;
            const double theta_rt = user == User::d1 ? t.theta1_rt : t.theta2_rt;
            g_direct = kOmaMap.inverse(theta);
            g_relay = kOmaMap.inverse(theta_rt);
            g_half = kOmaMap.inverse(0.5 * theta_rt);
        }
        switch (scheme) {
            case Scheme::dt: {
                if (std::isinf(g_direct)) return {1.0, true};
                return {clamp_probability(1.0 - success(sd, g_direct), "DT outage"), false};
            }
            case Scheme::rt: {
                if (std::isinf(g_relay)) return {1.0, true};
                const double s = success(LinkId::sr, g_relay) * success(rd, g_relay);
                return {clamp_probability(1.0 - s, "RT outage"), false};
            }
            case Scheme::ht: {
                if (std::isinf(g_half)) return {1.0, true};
                const double sd_half = success(sd, g_half);
                const double sr = success(LinkId::sr, g_relay);
                const double rd_full = success(rd, g_relay);
                const double sd_full = success(sd, g_relay);
                const double op = 1.0 - sd_half - sr + sd_half * sr + sr * (1.0 - rd_full) * (1.0 - sd_full);
                return {clamp_probability(op, "HT outage"), false};
            }
        }
        throw std::logic_error("outage: bad scheme");
    }

private:
    SystemConfig cfg_;
    Deployment deployment_;
    BeamformingConfig bf_;
    GainDistribution main_gains_{};
    FadingParams fading_;
    std::array<LinkSpec, 5> links_{};
    mutable std::mutex mutex_;
    mutable std::map<std::pair<int, double>, std::shared_ptr<ReceiverInterference>> receivers_;
};

inline OutageResult op_dt_noma(User user, const SystemConfig& cfg) {
    return Analysis(cfg).outage(Scheme::dt, Access::noma, user);
}
inline OutageResult op_rt_noma(User user, const SystemConfig& cfg) {
    return Analysis(cfg).outage(Scheme::rt, Access::noma, user);
}
inline OutageResult op_ht_noma(User user, const SystemConfig& cfg) {
    return Analysis(cfg).outage(Scheme::ht, Access::noma, user);
}
inline OutageResult op_oma(User user, Scheme scheme, const SystemConfig& cfg) {
    return Analysis(cfg).outage(scheme, Access::oma, user);
}

}  // namespace skynoma
