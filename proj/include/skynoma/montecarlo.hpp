#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "skynoma/channel.hpp"
#include "skynoma/config.hpp"
#include "skynoma/geometry.hpp"
#include "skynoma/laplace.hpp"
#include "skynoma/numerics.hpp"
#include "skynoma/outage.hpp"
#include "skynoma/rate.hpp"

namespace skynoma {

/// Received power K |h|^2 l of one interferer at the given separation.
inline double interferer_power(const InterferenceSourceSpec& spec, std::span<const GainLevel> marks,
                               double ground_distance, RngStream& rng) {
    const double dh = spec.height_diff;
    const double r2 = ground_distance * ground_distance + dh * dh;
    const bool los = rng.bernoulli(p_los(spec.los, ground_distance, dh));
    const int m = los ? spec.fading.m_los : spec.fading.m_nlos;
    const double alpha = los ? spec.fading.alpha_los : spec.fading.alpha_nlos;
    double gain = marks.front().gain;
    if (marks.size() > 1) {
        double u = rng.uniform();
        for (const auto& mk : marks) {
            gain = mk.gain;
            if (u < mk.probability) break;
            u -= mk.probability;
        }
    }
    return gain * sample_fading_power(m, rng) * path_loss_sq(r2, alpha);
}

/// One realization of the total interference of a single source around a
/// receiver at the origin. Only ground distances matter, so the fixed line and
/// the UAV disk draw them directly.
inline double sample_source_interference(const InterferenceSourceSpec& spec, std::span<const GainLevel> marks,
                                         RngStream& rng) {
    double total = 0.0;
    const double W = spec.extent;
    switch (spec.kind) {
        case SourceKind::fixed_line: {
            const auto n = rng.poisson(2.0 * spec.lambda_v * W);
            for (std::uint64_t i = 0; i < n; ++i) total += interferer_power(spec, marks, W * rng.uniform(), rng);
            break;
        }
        case SourceKind::cox_lines: {
            const auto lines = rng.poisson(2.0 * std::numbers::pi * spec.lambda_l * W);
            for (std::uint64_t j = 0; j < lines; ++j) {
                const double offset = rng.uniform(0.0, W);
                rng.uniform();  // orientation; distances do not depend on it
                const auto n = rng.poisson(2.0 * spec.lambda_v * W);
                for (std::uint64_t i = 0; i < n; ++i) {
                    const double t = rng.uniform(-W, W);
                    total += interferer_power(spec, marks, std::sqrt(offset * offset + t * t), rng);
                }
            }
            break;
        }
        case SourceKind::uav_bpp: {
            const auto n = static_cast<long>(std::lround(spec.n_uav));
            for (long i = 0; i < n; ++i)
                total += interferer_power(spec, marks, spec.disk_radius * std::sqrt(rng.uniform()), rng);
            break;
        }
    }
    return total;
}

struct TrialOutcome {
    bool outage_d1 = false;
    bool outage_d2 = false;
    double rate_d1 = 0.0;
    double rate_d2 = 0.0;
    bool relay_decoded = false;     // HT: relay decoded D1's message
    bool relay_decoded_d2 = false;  // HT: relay decoded both messages
};

/// Normalized link ratios X = K |h|^2 l / I for every link of one trial.
using LinkRatios = std::array<double, 5>;

/// Samples everything a trial needs that does not depend on rates or power
/// split: geometry, LOS states, fading, gains and steering errors.
class TrialSampler {
public:
    explicit TrialSampler(const SystemConfig& cfg) : cfg_(cfg) {
        validate(cfg_);
        deployment_ = build_deployment(cfg_);
        bf_ = beamforming(cfg_);
        marks_ = interferer_gain_distribution(bf_);
        fading_ = fading_params(cfg_);
        for (LinkId id : kAllLinks) {
            const auto i = static_cast<std::size_t>(id);
            links_[i] = link_of(deployment_, id, cfg_);
            sources_[i] = sources_at(cfg_, links_[i].rx.kind, links_[i].rx.position.z);
        }
    }

    const SystemConfig& config() const noexcept { return cfg_; }

    LinkRatios sample(RngStream& rng) const {
        LinkRatios x{};
        if (cfg_.correlation == Correlation::independent) {
            for (LinkId id : kAllLinks) {
                const auto i = static_cast<std::size_t>(id);
                double interference = 0.0;
                for (const auto& src : sources_[i]) interference += sample_source_interference(src, marks_, rng);
                x[i] = ratio(links_[i], sample_main_power(links_[i], rng), interference);
            }
            return x;
        }
        // One field per trial centred on S; every receiver sees its own distances.
        const auto& in = cfg_.interference;
        const double W = cfg_.geometry.window_radius;
        const CoxField cox = sample_cox(in.lambda_l, in.lambda_v, W, x_axis_line(), rng);
        const UavField uavs = sample_bpp_disk(cfg_.n_uav(), in.disk_radius, in.h_uav, rng);
        for (LinkId id : kAllLinks) {
            const auto i = static_cast<std::size_t>(id);
            const Vec3 rx = links_[i].rx.position;
            const auto& vehicle_src = sources_[i][0];
            const auto& uav_src = sources_[i][2];
            double interference = 0.0;
            for (const Vehicle& v : cox.vehicles)
                interference += interferer_power(vehicle_src, marks_, std::hypot(v.position.x - rx.x, v.position.y - rx.y), rng);
            for (const Vec3& p : uavs.positions)
                interference += interferer_power(uav_src, marks_, std::hypot(p.x - rx.x, p.y - rx.y), rng);
            x[i] = ratio(links_[i], sample_main_power(links_[i], rng), interference);
        }
        return x;
    }

private:
    static double ratio(const LinkSpec& /*link*/, double signal, double interference) {
        if (interference <= 0.0) return kInf;
        return signal / interference;
    }

    /// K_main |h|^2 l of the intended link with sampled LOS state and steering errors.
    double sample_main_power(const LinkSpec& l, RngStream& rng) const {
        const double d = l.distance();
        if (!(d > 0.0)) throw DegenerateLink("intended link has zero length");
        const bool los = rng.bernoulli(p_los(l.los, l.tx.position, l.rx.position));
        const int m = los ? fading_.m_los : fading_.m_nlos;
        const double alpha = los ? fading_.alpha_los : fading_.alpha_nlos;
        const double half_beam = 0.5 * bf_.theta_bf;
        auto end_gain = [&] {
            if (bf_.sigma_e == 0.0) return bf_.main_gain;
            return std::abs(rng.normal(0.0, bf_.sigma_e)) <= half_beam ? bf_.main_gain : bf_.side_gain;
        };
        const double k_tx = end_gain();
        const double k_rx = end_gain();
        return k_tx * k_rx * sample_fading_power(m, rng) * path_loss(d, alpha);
    }

    SystemConfig cfg_;
    Deployment deployment_;
    BeamformingConfig bf_;
    GainDistribution marks_{};
    FadingParams fading_;
    std::array<LinkSpec, 5> links_{};
    std::array<std::vector<InterferenceSourceSpec>, 5> sources_{};
};

/// The decoding cascade of one trial for a given power split, rates and
/// scheme, from already sampled link ratios.
struct Protocol {
    NomaConfig noma;
    Scheme scheme = Scheme::dt;
    Access access = Access::noma;

    static Protocol of(const SystemConfig& c) { return {c.noma, c.scheme, c.access}; }

    TrialOutcome evaluate(const LinkRatios& x) const {
        TrialOutcome out;
        const double sd[2] = {x[0], x[1]};
        const double sr = x[2];
        const double rd[2] = {x[3], x[4]};
        const double t1 = std::exp2(noma.r1) - 1.0;
        const double t2 = std::exp2(noma.r2) - 1.0;
        const double t1_rt = std::exp2(2.0 * noma.r1) - 1.0;
        const double t2_rt = std::exp2(2.0 * noma.r2) - 1.0;
        const double kappa = rate_scale(scheme, access);

        // own[i](x): SIR for decoding user i's message; first(x): D1's message.
        auto sir_first = [&](double v) {
            if (access == Access::oma) return v;
            return std::isinf(v) ? noma.a1 / noma.a2 : noma.a1 * v / (noma.a2 * v + 1.0);
        };
        auto sir_second = [&](double v) {
            if (access == Access::oma) return v;
            if (std::isinf(v)) return noma.gamma > 0.0 ? noma.a2 / (noma.gamma * noma.a1) : kInf;
            return noma.a2 * v / (noma.gamma * noma.a1 * v + 1.0);
        };
        auto own_sir = [&](int user, double v) { return user == 0 ? sir_first(v) : sir_second(v); };
        // Whether a receiver seeing ratio v decodes `user`'s message at thresholds (ta, tb).
        auto decodes = [&](int user, double v, double ta, double tb) {
            if (access == Access::oma) return v >= (user == 0 ? ta : tb);
            if (user == 0) return sir_first(v) >= ta;
            return sir_first(v) >= ta && sir_second(v) >= tb;
        };

        const double oma_t1 = std::exp2(2.0 * noma.r1) - 1.0;
        const double oma_t2 = std::exp2(2.0 * noma.r2) - 1.0;
        const double oma_t1_rt = std::exp2(4.0 * noma.r1) - 1.0;
        const double oma_t2_rt = std::exp2(4.0 * noma.r2) - 1.0;
        const bool oma = access == Access::oma;
        const double ta_dt = oma ? oma_t1 : t1;
        const double tb_dt = oma ? oma_t2 : t2;
        const double ta_rt = oma ? oma_t1_rt : t1_rt;
        const double tb_rt = oma ? oma_t2_rt : t2_rt;

        bool outage[2];
        double rate[2];
        bool decoded[2] = {false, false};
        for (int u = 0; u < 2; ++u) {
            switch (scheme) {
                case Scheme::dt:
                    outage[u] = !decodes(u, sd[u], ta_dt, tb_dt);
                    rate[u] = kappa * std::log2(1.0 + own_sir(u, sd[u]));
                    break;
                case Scheme::rt:
                    outage[u] = !(decodes(u, sr, ta_rt, tb_rt) && decodes(u, rd[u], ta_rt, tb_rt));
                    rate[u] = kappa * std::log2(1.0 + std::min(own_sir(u, sr), own_sir(u, rd[u])));
                    break;
                case Scheme::ht: {
                    decoded[u] = decodes(u, sr, ta_rt, tb_rt);
                    if (decoded[u]) {
                        outage[u] = !(decodes(u, sd[u], ta_rt, tb_rt) || decodes(u, rd[u], ta_rt, tb_rt));
                        rate[u] = std::max(kappa * std::log2(1.0 + std::min(own_sir(u, sr), own_sir(u, rd[u]))),
                                           kappa * std::log2(1.0 + own_sir(u, sd[u])));
                    } else {
                        outage[u] = !decodes(u, sd[u], 0.5 * ta_rt, 0.5 * tb_rt);
                        rate[u] = kappa * std::log2(1.0 + 2.0 * own_sir(u, sd[u]));
                    }
                    break;
                }
            }
        }
        out.outage_d1 = outage[0];
        out.outage_d2 = outage[1];
        out.rate_d1 = rate[0];
        out.rate_d2 = rate[1];
        out.relay_decoded = decoded[0];
        out.relay_decoded_d2 = decoded[1];
        return out;
    }
};

inline TrialOutcome run_trial(const SystemConfig& cfg, RngStream& rng) {
    return Protocol::of(cfg).evaluate(TrialSampler(cfg).sample(rng));
}

/// Link ratios of trials [0, trials), trial i drawn from stream (seed, i).
/// Identical for any worker count.
inline std::vector<LinkRatios> sample_link_ratios(const SystemConfig& cfg, std::size_t trials, std::uint64_t seed,
                                                  unsigned workers = 1) {
    const TrialSampler sampler(cfg);
    std::vector<LinkRatios> out(trials);
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RngStream rng(seed, i);
            out[i] = sampler.sample(rng);
        }
    };
    workers = std::max(1u, workers);
    if (workers == 1 || trials < 2) {
        run(0, trials);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(trials, w * chunk);
        const std::size_t end = std::min(trials, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                run(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

enum class Metric { op_d1, op_d2, aar_d1, aar_d2 };

inline std::string to_string(Metric m) {
    switch (m) {
        case Metric::op_d1: return "OP_D1";
        case Metric::op_d2: return "OP_D2";
        case Metric::aar_d1: return "AAR_D1";
        case Metric::aar_d2: return "AAR_D2";
    }
    return "?";
}

struct McEstimate {
    double mean = 0.0;
    double half_width_95 = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval half-width for a binomial proportion.
inline double wilson_half_width(double p_hat, std::size_t n, double z = kZ95) {
    const double nn = static_cast<double>(n);
    const double z2 = z * z;
    return z / (1.0 + z2 / nn) * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn));
}

/// Estimate of one metric from sampled ratios and a decoding protocol.
inline McEstimate estimate_from_ratios(std::span<const LinkRatios> ratios, const Protocol& protocol, Metric metric,
                                       std::uint64_t seed = 0) {
    const std::size_t n = ratios.size();
    if (n == 0) throw std::invalid_argument("estimate: no trials");
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TrialOutcome o = protocol.evaluate(ratios[i]);
        switch (metric) {
            case Metric::op_d1: values[i] = o.outage_d1 ? 1.0 : 0.0; break;
            case Metric::op_d2: values[i] = o.outage_d2 ? 1.0 : 0.0; break;
            case Metric::aar_d1: values[i] = o.rate_d1; break;
            case Metric::aar_d2: values[i] = o.rate_d2; break;
        }
    }
    McEstimate est;
    est.trials = n;
    est.seed = seed;
    est.mean = pairwise_sum(values) / static_cast<double>(n);
    if (metric == Metric::op_d1 || metric == Metric::op_d2) {
        est.half_width_95 = wilson_half_width(est.mean, n);
        est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(n));
    } else {
        for (auto& v : values) v = (v - est.mean) * (v - est.mean);
        const double var = n > 1 ? pairwise_sum(values) / static_cast<double>(n - 1) : 0.0;
        est.std_error = std::sqrt(var / static_cast<double>(n));
        est.half_width_95 = kZ95 * est.std_error;
    }
    return est;
}

inline McEstimate estimate(const SystemConfig& cfg, Metric metric, std::size_t trials, std::uint64_t base_seed,
                           unsigned workers = 1) {
    if (trials < 1) throw std::invalid_argument("estimate: trials must be >= 1");
    const auto ratios = sample_link_ratios(cfg, trials, base_seed, workers);
    return estimate_from_ratios(ratios, Protocol::of(cfg), metric, base_seed);
}

}  // namespace skynoma
