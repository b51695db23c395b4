#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "skynoma/errors.hpp"

namespace skynoma {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class InfiniteDomainMap { tangent_substitution, exponential_substitution };

struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_subdivisions = 2000;
    InfiniteDomainMap infinite_domain_map = InfiniteDomainMap::tangent_substitution;

    void validate() const {
        if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: rel_tol must be > 0");
        if (!(abs_tol >= 0.0)) throw std::invalid_argument("QuadratureSpec: abs_tol must be >= 0");
        if (max_subdivisions < 1)
            throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
    }
};

namespace detail {

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod15(F& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_centre = f(centre);
    double kronrod = f_centre * kKronrodWeights[7];
    double gauss = f_centre * kGaussWeights[3];
    double abs_sum = std::abs(kronrod);
    std::array<double, 7> f_lo{};
    std::array<double, 7> f_hi{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        f_lo[j] = f(centre - dx);
        f_hi[j] = f(centre + dx);
        const double pair = f_lo[j] + f_hi[j];
        kronrod += kKronrodWeights[j] * pair;
        abs_sum += kKronrodWeights[j] * (std::abs(f_lo[j]) + std::abs(f_hi[j]));
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double asc = kKronrodWeights[7] * std::abs(f_centre - mean);
    for (int j = 0; j < 7; ++j)
        asc += kKronrodWeights[j] * (std::abs(f_lo[j] - mean) + std::abs(f_hi[j] - mean));

    const double abs_half = std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    asc *= abs_half;
    abs_sum *= abs_half;
    // QUADPACK error scaling.
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * abs_sum;
    if (abs_sum > std::numeric_limits<double>::min() / (50.0 * std::numeric_limits<double>::epsilon()))
        err = std::max(err, roundoff);
    return {a, b, kronrod * half, err};
}

template <class F>
double adaptive_finite(F& f, double a, double b, const QuadratureSpec& spec) {
    std::priority_queue<Panel> panels;
    Panel first = gauss_kronrod15(f, a, b);
    double total = first.value;
    double total_err = first.error;
    panels.push(first);
    // Error from panels too narrow to split further.
    double frozen_err = 0.0;
    int subdivisions = 1;
    auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
    while (total_err > tolerance()) {
        if (panels.empty()) {
            throw NonConvergence("integrate: roundoff limits accuracy (error " +
                                 std::to_string(total_err) + ")");
        }
        if (subdivisions >= spec.max_subdivisions) {
            throw NonConvergence("integrate: subdivision budget of " +
                                 std::to_string(spec.max_subdivisions) +
                                 " exhausted (error estimate " + std::to_string(total_err) +
                                 ", value " + std::to_string(total) + ")");
        }
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const double scale = std::max(std::abs(worst.a), std::abs(worst.b));
        if (!(mid > worst.a && mid < worst.b) ||
            (worst.b - worst.a) < 64.0 * std::numeric_limits<double>::epsilon() * scale) {
            frozen_err += worst.error;
            if (frozen_err > tolerance()) {
                throw NonConvergence("integrate: interval cannot be refined further near x=" +
                                     std::to_string(mid));
            }
            continue;
        }
        Panel left = gauss_kronrod15(f, worst.a, mid);
        Panel right = gauss_kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++subdivisions;
    }
    if (!std::isfinite(total)) throw NonConvergence("integrate: integrand is not finite on the interval");
    return total;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) quadrature of f over [a, b].
///
/// Either limit may be infinite; unbounded ranges are mapped onto a compact
/// interval with the substitution selected in `spec`. The returned value
/// satisfies the estimator bound |error| <= max(abs_tol, rel_tol * |result|)
/// or NonConvergence is thrown.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (std::isnan(a) || std::isnan(b)) throw std::invalid_argument("integrate: NaN limit");
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, spec);

    const bool lo_inf = std::isinf(a);
    const bool hi_inf = std::isinf(b);
    if (!lo_inf && !hi_inf) return detail::adaptive_finite(f, a, b, spec);

    if (spec.infinite_domain_map == InfiniteDomainMap::tangent_substitution) {
        if (lo_inf && hi_inf) {
            auto g = [&f](double t) {
                const double c = std::cos(t);
                return f(std::tan(t)) / (c * c);
            };
            return detail::adaptive_finite(g, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi, spec);
        }
        if (hi_inf) {
            auto g = [&f, a](double t) {
                const double c = std::cos(t);
                return f(a + std::tan(t)) / (c * c);
            };
            return detail::adaptive_finite(g, 0.0, 0.5 * std::numbers::pi, spec);
        }
        auto g = [&f, b](double t) {
            const double c = std::cos(t);
            return f(b - std::tan(t)) / (c * c);
        };
        return detail::adaptive_finite(g, 0.0, 0.5 * std::numbers::pi, spec);
    }

    // x = a - ln(u), u in (0, 1].
    if (lo_inf && hi_inf) {
        return integrate(f, -kInf, 0.0, spec) + integrate(f, 0.0, kInf, spec);
    }
    if (hi_inf) {
        auto g = [&f, a](double u) { return f(a - std::log(u)) / u; };
        return detail::adaptive_finite(g, 0.0, 1.0, spec);
    }
    auto g = [&f, b](double u) { return f(b + std::log(u)) / u; };
    return detail::adaptive_finite(g, 0.0, 1.0, spec);
}

inline double erf(double x) { return std::erf(x); }

/// Alzer's constant c = Gamma(m+1)^(-1/m) for the gamma CDF bound.
inline double alzer_constant(int m) {
    if (m < 1) throw std::invalid_argument("alzer_constant: m must be >= 1");
    return std::pow(std::tgamma(m + 1.0), -1.0 / m);
}

/// Regularized upper incomplete gamma Q(m, z) = Gamma(m, z) / Gamma(m) for
/// integer m, via the terminating series e^{-z} sum_{k<m} z^k / k!.
inline double gamma_upper_ratio(int m, double z) {
    if (m < 1) throw std::invalid_argument("gamma_upper_ratio: m must be >= 1");
    if (z < 0.0) throw std::invalid_argument("gamma_upper_ratio: z must be >= 0");
    if (z == 0.0) return 1.0;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < m; ++k) {
        term *= z / k;
        sum += term;
    }
    return std::min(1.0, std::exp(-z) * sum);
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return std::round(c);
}

/// Pairwise (cascade) summation in index order; independent of how the
/// values were produced.
inline double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Natural cubic spline through equally spaced samples; linear beyond the ends.
class UniformSpline {
public:
    UniformSpline() = default;

    UniformSpline(double x0, double step, std::vector<double> y) : x0_(x0), h_(step), y_(std::move(y)) {
        if (!(step > 0.0) || y_.size() < 2) throw std::invalid_argument("UniformSpline: need step > 0 and two samples");
        const std::size_t n = y_.size();
        m_.assign(n, 0.0);
        if (n > 2) {
            // Tridiagonal solve for second derivatives, natural end conditions.
            std::vector<double> c(n, 0.0), d(n, 0.0);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double rhs = 6.0 * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / (h_ * h_);
                const double denom = 4.0 - c[i - 1];
                c[i] = 1.0 / denom;
                d[i] = (rhs - d[i - 1]) / denom;
            }
            for (std::size_t i = n - 2; i >= 1; --i) {
                m_[i] = d[i] - c[i] * m_[i + 1];
                if (i == 1) break;
            }
        }
    }

    bool empty() const noexcept { return y_.empty(); }
    double front_x() const noexcept { return x0_; }
    double back_x() const noexcept { return x0_ + h_ * static_cast<double>(y_.size() - 1); }

    double operator()(double x) const {
        const std::size_t n = y_.size();
        if (x <= x0_) return y_[0] + (x - x0_) * end_slope(0);
        if (x >= back_x()) return y_[n - 1] + (x - back_x()) * end_slope(n - 1);
        const double t = (x - x0_) / h_;
        const auto i = std::min(static_cast<std::size_t>(t), n - 2);
        const double a = static_cast<double>(i + 1) - t;
        const double b = 1.0 - a;
        return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h_ * h_ / 6.0;
    }

private:
    double end_slope(std::size_t i) const {
        const std::size_t n = y_.size();
        if (i == 0) return (y_[1] - y_[0]) / h_ - h_ * (2.0 * m_[0] + m_[1]) / 6.0;
        return (y_[n - 1] - y_[n - 2]) / h_ + h_ * (m_[n - 2] + 2.0 * m_[n - 1]) / 6.0;
    }

    double x0_ = 0.0;
    double h_ = 1.0;
    std::vector<double> y_;
    std::vector<double> m_;
};

/// Reproducible random stream identified by (seed, stream_id).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32), 0x5eedu};
        engine_.seed(seq);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
    /// Integer shapes up to 16 sum exponentials; others use the library sampler.
    double gamma(double shape, double scale) {
        if (shape == std::floor(shape) && shape >= 1.0 && shape <= 16.0) {
            double sum = 0.0;
            for (int i = 0; i < static_cast<int>(shape); ++i) sum -= std::log1p(-uniform());
            return sum * scale;
        }
        return std::gamma_distribution<double>(shape, scale)(engine_);
    }
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::uint64_t>(mean)(engine_);
    }
    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

}  // namespace skynoma
