#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "skynoma/errors.hpp"
#include "skynoma/numerics.hpp"

namespace skynoma {

enum class Platform { ntfp, rsu };
enum class RelayRole { relay, source };
enum class Scheme { dt, rt, ht };
enum class Access { noma, oma };
enum class User { d1, d2 };
enum class LosMode { lsm, nlos, los };
enum class Correlation { independent, common_field };
enum class Thinning { marked, independent_product };

struct NomaConfig {
    double a1 = 0.8;
    double a2 = 0.2;
    double r1 = 0.5;
    double r2 = 1.5;
    double gamma = 0.0;
};

struct ChannelConfig {
    double alpha_los = 2.0;
    double alpha_nlos = 4.0;
    // Stored as real so that non-integer input can be reported, not truncated.
    double m_los = 2.0;
    double m_nlos = 1.0;
    double los_a = 11.95;
    double los_b = 0.136;
    double beta = 0.0095;
    LosMode los_mode = LosMode::lsm;
};

struct BeamConfig {
    double main_gain = 63.0;
    double side_gain = 0.63;
    double theta_bf_deg = 30.0;
    double sigma_e_deg = 10.0;
};

struct InterferenceConfig {
    double lambda_l = 1e-3;
    double lambda_v = 5e-4;
    double n_uav = 500.0;
    double h_uav = 150.0;
    double disk_radius = 1e4;
};

struct GeometryConfig {
    double h_ntfp = 500.0;
    double h_rsu = 10.0;
    double h_vehicle = 0.0;
    double dist_sd1 = 220.0;
    double dist_sd2 = 230.0;
    double window_radius = 1e4;
};

struct NumericsConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    double max_subdivisions = 2000;
    double rate_rel_tol = 1e-6;
    double rate_cap = 30.0;
};

struct SystemConfig {
    NomaConfig noma;
    ChannelConfig channel;
    BeamConfig beam;
    InterferenceConfig interference;
    GeometryConfig geometry;
    Platform platform = Platform::ntfp;
    RelayRole role = RelayRole::relay;
    Scheme scheme = Scheme::rt;
    Access access = Access::noma;
    Correlation correlation = Correlation::independent;
    Thinning thinning = Thinning::marked;
    NumericsConfig numerics;

    int m_los() const { return static_cast<int>(std::lround(channel.m_los)); }
    int m_nlos() const { return static_cast<int>(std::lround(channel.m_nlos)); }
    int n_uav() const { return static_cast<int>(std::lround(interference.n_uav)); }
    double theta_bf() const { return beam.theta_bf_deg * std::numbers::pi / 180.0; }
    double sigma_e() const { return beam.sigma_e_deg * std::numbers::pi / 180.0; }

    QuadratureSpec quadrature() const {
        QuadratureSpec q;
        q.rel_tol = numerics.rel_tol;
        q.abs_tol = numerics.abs_tol;
        q.max_subdivisions = static_cast<int>(numerics.max_subdivisions);
        return q;
    }
};

// ---------------------------------------------------------------------------
// Text conversions

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::optional<double> parse_real(const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "inf" || t == "+inf" || t == "infinity") return kInf;
    double value = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || t.empty()) return std::nullopt;
    return value;
}

/// Shortest round-trip representation.
inline std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace detail

inline std::string to_string(Platform p) { return p == Platform::ntfp ? "NTFP" : "RSU"; }
inline std::string to_string(RelayRole r) { return r == RelayRole::relay ? "relay" : "source"; }
inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::dt: return "DT";
        case Scheme::rt: return "RT";
        case Scheme::ht: return "HT";
    }
    return "?";
}
inline std::string to_string(Access a) { return a == Access::noma ? "NOMA" : "OMA"; }
inline std::string to_string(User u) { return u == User::d1 ? "D1" : "D2"; }
inline std::string to_string(LosMode m) {
    switch (m) {
        case LosMode::lsm: return "lsm";
        case LosMode::nlos: return "nlos";
        case LosMode::los: return "los";
    }
    return "?";
}
inline std::string to_string(Correlation c) {
    return c == Correlation::independent ? "independent" : "common-field";
}
inline std::string to_string(Thinning t) {
    return t == Thinning::marked ? "marked" : "independent_product";
}

template <class E>
std::optional<E> parse_enum(const std::string& text, std::initializer_list<E> options) {
    const std::string t = detail::lower(detail::trim(text));
    for (E e : options)
        if (detail::lower(to_string(e)) == t) return e;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Field registry: every config value is addressable by a dotted path.

struct ConfigField {
    std::string path;
    std::function<std::string(const SystemConfig&)> get;
    // Returns false when the text does not parse for this field.
    std::function<bool(SystemConfig&, const std::string&)> set;
};

namespace detail {

template <class Ref>
ConfigField make_real(std::string path, Ref ref) {
    return {std::move(path),
            [ref](const SystemConfig& c) { return format_real(ref(const_cast<SystemConfig&>(c))); },
            [ref](SystemConfig& c, const std::string& text) {
                auto v = parse_real(text);
                if (!v) return false;
                ref(c) = *v;
                return true;
            }};
}

template <class E, class Ref>
ConfigField make_enum(std::string path, Ref ref, std::initializer_list<E> options) {
    std::vector<E> opts(options);
    return {std::move(path),
            [ref](const SystemConfig& c) { return to_string(ref(const_cast<SystemConfig&>(c))); },
            [ref, opts](SystemConfig& c, const std::string& text) {
                const std::string t = lower(trim(text));
                for (E e : opts) {
                    if (lower(to_string(e)) == t) {
                        ref(c) = e;
                        return true;
                    }
                }
                return false;
            }};
}

}  // namespace detail

inline const std::vector<ConfigField>& config_fields() {
    using detail::make_enum;
    using detail::make_real;
    using C = SystemConfig;
    static const std::vector<ConfigField> fields = [] {
        std::vector<ConfigField> f;
        f.push_back(make_real("noma.a1", [](C& c) -> double& { return c.noma.a1; }));
        f.push_back(make_real("noma.a2", [](C& c) -> double& { return c.noma.a2; }));
        f.push_back(make_real("noma.r1", [](C& c) -> double& { return c.noma.r1; }));
        f.push_back(make_real("noma.r2", [](C& c) -> double& { return c.noma.r2; }));
        f.push_back(make_real("noma.gamma", [](C& c) -> double& { return c.noma.gamma; }));
        f.push_back(make_real("channel.alpha_los", [](C& c) -> double& { return c.channel.alpha_los; }));
        f.push_back(make_real("channel.alpha_nlos", [](C& c) -> double& { return c.channel.alpha_nlos; }));
        f.push_back(make_real("channel.m_los", [](C& c) -> double& { return c.channel.m_los; }));
        f.push_back(make_real("channel.m_nlos", [](C& c) -> double& { return c.channel.m_nlos; }));
        f.push_back(make_real("channel.a", [](C& c) -> double& { return c.channel.los_a; }));
        f.push_back(make_real("channel.b", [](C& c) -> double& { return c.channel.los_b; }));
        f.push_back(make_real("channel.beta", [](C& c) -> double& { return c.channel.beta; }));
        f.push_back(make_enum("channel.los_mode", [](C& c) -> LosMode& { return c.channel.los_mode; },
                              {LosMode::lsm, LosMode::nlos, LosMode::los}));
        f.push_back(make_real("beamforming.main_gain", [](C& c) -> double& { return c.beam.main_gain; }));
        f.push_back(make_real("beamforming.side_gain", [](C& c) -> double& { return c.beam.side_gain; }));
        f.push_back(make_real("beamforming.theta_bf_deg", [](C& c) -> double& { return c.beam.theta_bf_deg; }));
        f.push_back(make_real("beamforming.sigma_e_deg", [](C& c) -> double& { return c.beam.sigma_e_deg; }));
        f.push_back(make_real("interference.lambda_l", [](C& c) -> double& { return c.interference.lambda_l; }));
        f.push_back(make_real("interference.lambda_v", [](C& c) -> double& { return c.interference.lambda_v; }));
        f.push_back(make_real("interference.n_uav", [](C& c) -> double& { return c.interference.n_uav; }));
        f.push_back(make_real("interference.h_uav", [](C& c) -> double& { return c.interference.h_uav; }));
        f.push_back(make_real("interference.disk_radius", [](C& c) -> double& { return c.interference.disk_radius; }));
        f.push_back(make_real("geometry.h_ntfp", [](C& c) -> double& { return c.geometry.h_ntfp; }));
        f.push_back(make_real("geometry.h_rsu", [](C& c) -> double& { return c.geometry.h_rsu; }));
        f.push_back(make_real("geometry.h_vehicle", [](C& c) -> double& { return c.geometry.h_vehicle; }));
        f.push_back(make_real("geometry.dist_sd1", [](C& c) -> double& { return c.geometry.dist_sd1; }));
        f.push_back(make_real("geometry.dist_sd2", [](C& c) -> double& { return c.geometry.dist_sd2; }));
        f.push_back(make_real("geometry.window_radius", [](C& c) -> double& { return c.geometry.window_radius; }));
        f.push_back(make_enum("deployment.platform", [](C& c) -> Platform& { return c.platform; },
                              {Platform::ntfp, Platform::rsu}));
        f.push_back(make_enum("deployment.role", [](C& c) -> RelayRole& { return c.role; },
                              {RelayRole::relay, RelayRole::source}));
        f.push_back(make_enum("scheme.type", [](C& c) -> Scheme& { return c.scheme; },
                              {Scheme::dt, Scheme::rt, Scheme::ht}));
        f.push_back(make_enum("scheme.access", [](C& c) -> Access& { return c.access; },
                              {Access::noma, Access::oma}));
        f.push_back(make_enum("montecarlo.correlation", [](C& c) -> Correlation& { return c.correlation; },
                              {Correlation::independent, Correlation::common_field}));
        f.push_back(make_enum("laplace.thinning", [](C& c) -> Thinning& { return c.thinning; },
                              {Thinning::marked, Thinning::independent_product}));
        f.push_back(make_real("numerics.rel_tol", [](C& c) -> double& { return c.numerics.rel_tol; }));
        f.push_back(make_real("numerics.abs_tol", [](C& c) -> double& { return c.numerics.abs_tol; }));
        f.push_back(make_real("numerics.max_subdivisions", [](C& c) -> double& { return c.numerics.max_subdivisions; }));
        f.push_back(make_real("numerics.rate_rel_tol", [](C& c) -> double& { return c.numerics.rate_rel_tol; }));
        f.push_back(make_real("numerics.rate_cap", [](C& c) -> double& { return c.numerics.rate_cap; }));
        std::sort(f.begin(), f.end(), [](const ConfigField& x, const ConfigField& y) { return x.path < y.path; });
        return f;
    }();
    return fields;
}

inline const ConfigField* find_field(std::string_view path) {
    for (const auto& f : config_fields())
        if (f.path == path) return &f;
    return nullptr;
}

/// Sets one field by path. Power coefficients stay complementary: setting one
/// of noma.a1 / noma.a2 moves the other.
inline void set_field(SystemConfig& cfg, const std::string& path, const std::string& value) {
    const ConfigField* field = find_field(path);
    if (!field) throw InvalidConfig(path + ": unknown parameter path");
    if (!field->set(cfg, value)) throw InvalidConfig(path + ": cannot parse value '" + value + "'");
    if (path == "noma.a1") cfg.noma.a2 = 1.0 - cfg.noma.a1;
    if (path == "noma.a2") cfg.noma.a1 = 1.0 - cfg.noma.a2;
}

inline std::string get_field(const SystemConfig& cfg, const std::string& path) {
    const ConfigField* field = find_field(path);
    if (!field) throw InvalidConfig(path + ": unknown parameter path");
    return field->get(cfg);
}

// ---------------------------------------------------------------------------
// Validation

inline std::vector<std::string> violations(const SystemConfig& c) {
    std::vector<std::string> out;
    auto need = [&out](bool ok, const std::string& msg) {
        if (!ok) out.push_back(msg);
    };
    auto is_positive_int = [](double v) { return v >= 1.0 && std::isfinite(v) && v == std::floor(v); };

    need(c.noma.a1 > 0.0 && c.noma.a1 < 1.0, "noma.a1: a1 ∈ (0,1)");
    need(c.noma.a2 > 0.0 && c.noma.a2 < 1.0, "noma.a2: a2 ∈ (0,1)");
    need(std::abs(c.noma.a1 + c.noma.a2 - 1.0) <= 1e-12, "noma.a2: a1 + a2 must equal 1");
    need(c.noma.r1 > 0.0 && std::isfinite(c.noma.r1), "noma.r1: R1 must be > 0");
    need(c.noma.r2 > 0.0 && std::isfinite(c.noma.r2), "noma.r2: R2 must be > 0");
    need(c.noma.gamma >= 0.0 && c.noma.gamma <= 1.0, "noma.gamma: gamma ∈ [0,1]");

    need(is_positive_int(c.channel.m_los),
         "channel.m_los: Nakagami m must be a positive integer (Alzer expansion)");
    need(is_positive_int(c.channel.m_nlos),
         "channel.m_nlos: Nakagami m must be a positive integer (Alzer expansion)");
    need(c.channel.m_los <= 64.0, "channel.m_los: m must be <= 64");
    need(c.channel.m_nlos <= 64.0, "channel.m_nlos: m must be <= 64");
    need(c.channel.alpha_los > 0.0, "channel.alpha_los: path-loss exponent must be > 0");
    need(c.channel.alpha_nlos > 0.0, "channel.alpha_nlos: path-loss exponent must be > 0");
    need(c.channel.alpha_nlos >= c.channel.alpha_los, "channel.alpha_nlos: must be >= alpha_los");
    need(c.channel.beta >= 0.0, "channel.beta: beta must be >= 0");
    need(c.channel.los_a > 0.0, "channel.a: a must be > 0");
    need(c.channel.los_b > 0.0, "channel.b: b must be > 0");

    need(c.beam.side_gain > 0.0, "beamforming.side_gain: g must be > 0");
    need(c.beam.main_gain >= c.beam.side_gain, "beamforming.main_gain: G must be >= g");
    need(c.beam.theta_bf_deg > 0.0 && c.beam.theta_bf_deg <= 360.0,
         "beamforming.theta_bf_deg: theta_BF ∈ (0,360]");
    need(c.beam.sigma_e_deg >= 0.0, "beamforming.sigma_e_deg: sigma_e must be >= 0");

    need(c.interference.lambda_l >= 0.0, "interference.lambda_l: lambda_L must be >= 0");
    need(c.interference.lambda_v >= 0.0, "interference.lambda_v: lambda_V must be >= 0");
    need(c.interference.n_uav >= 0.0 && c.interference.n_uav == std::floor(c.interference.n_uav),
         "interference.n_uav: N_U must be a nonnegative integer");
    need(c.interference.h_uav >= 0.0, "interference.h_uav: height must be >= 0");
    need(c.interference.disk_radius > 0.0 && std::isfinite(c.interference.disk_radius),
         "interference.disk_radius: L must be finite and > 0");

    need(c.geometry.h_ntfp >= 0.0, "geometry.h_ntfp: height must be >= 0");
    need(c.geometry.h_rsu >= 0.0, "geometry.h_rsu: height must be >= 0");
    need(c.geometry.h_vehicle >= 0.0, "geometry.h_vehicle: height must be >= 0");
    need(c.geometry.dist_sd1 > 0.0 && std::isfinite(c.geometry.dist_sd1),
         "geometry.dist_sd1: distance must be > 0");
    need(c.geometry.dist_sd2 > 0.0 && std::isfinite(c.geometry.dist_sd2),
         "geometry.dist_sd2: distance must be > 0");
    need(c.geometry.window_radius > 0.0, "geometry.window_radius: must be > 0");

    need(c.numerics.rel_tol > 0.0, "numerics.rel_tol: must be > 0");
    need(c.numerics.abs_tol >= 0.0, "numerics.abs_tol: must be >= 0");
    need(c.numerics.max_subdivisions >= 1.0, "numerics.max_subdivisions: must be >= 1");
    need(c.numerics.rate_rel_tol > 0.0, "numerics.rate_rel_tol: must be > 0");
    need(c.numerics.rate_cap >= 30.0 && std::isfinite(c.numerics.rate_cap),
         "numerics.rate_cap: must be finite and >= 30");
    return out;
}

inline void validate(const SystemConfig& c) {
    auto v = violations(c);
    if (!v.empty()) throw InvalidConfig(std::move(v));
}

// ---------------------------------------------------------------------------
// Key-value text format: `path = value`, `#` starts a comment.

struct KeyValue {
    std::string key;
    std::string value;
    int line;
};

inline std::vector<KeyValue> parse_key_values(std::istream& in) {
    std::vector<KeyValue> out;
    std::string raw;
    int line_no = 0;
    std::vector<std::string> errors;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
            continue;
        }
        out.push_back({detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), line_no});
    }
    if (!errors.empty()) throw InvalidConfig(std::move(errors));
    return out;
}

/// Applies entries onto `cfg`; collects every problem before throwing.
inline void apply_entries(SystemConfig& cfg, const std::vector<KeyValue>& entries) {
    std::vector<std::string> errors;
    bool saw_a1 = false;
    bool saw_a2 = false;
    for (const auto& kv : entries) {
        const ConfigField* field = find_field(kv.key);
        if (!field) {
            errors.push_back(kv.key + ": unknown parameter path");
            continue;
        }
        if (!field->set(cfg, kv.value)) {
            errors.push_back(kv.key + ": cannot parse value '" + kv.value + "'");
            continue;
        }
        saw_a1 |= kv.key == "noma.a1";
        saw_a2 |= kv.key == "noma.a2";
    }
    if (saw_a1 && !saw_a2) cfg.noma.a2 = 1.0 - cfg.noma.a1;
    if (saw_a2 && !saw_a1) cfg.noma.a1 = 1.0 - cfg.noma.a2;
    if (!errors.empty()) throw InvalidConfig(std::move(errors));
}

inline SystemConfig parse_config(std::istream& in) {
    SystemConfig cfg;
    apply_entries(cfg, parse_key_values(in));
    validate(cfg);
    return cfg;
}

inline SystemConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline SystemConfig load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open config file '" + file + "'");
    return parse_config(in);
}

/// Canonical `path = value` listing of every field, sorted by path.
inline std::string canonical_text(const SystemConfig& cfg) {
    std::string out;
    for (const auto& f : config_fields()) {
        out += f.path;
        out += " = ";
        out += f.get(cfg);
        out += '\n';
    }
    return out;
}

/// FNV-1a 64 over the canonical text, as 16 hex digits.
inline std::string config_hash(const SystemConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canonical_text(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace skynoma
