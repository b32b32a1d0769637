#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace helmlab {

using complexd = std::complex<double>;

/// Compensated (Kahan-Neumaier) accumulator. Sweeps compare ratios across
/// decades of epsilon, so plain summation drift is not acceptable.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double kahan_total(const std::vector<double>& xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// ---------------------------------------------------------------------------
// Finite differences on uniformly spaced samples.

/// 4th-order first derivative of uniformly spaced samples; one-sided
/// 4th-order closures at both ends. Requires at least 6 samples.
template <typename T>
std::vector<T> derivative4(const std::vector<T>& f, double h) {
    const std::size_t n = f.size();
    if (n < 6) throw std::invalid_argument("derivative4: need at least 6 samples");
    std::vector<T> d(n);
    const double ih = 1.0 / (12.0 * h);
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * ih;
    // one-sided / skewed 4th-order closures
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * ih;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * ih;
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * ih;
    d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) * ih;
    return d;
}

/// 2nd-order central first derivative, one-sided at the ends.
template <typename T>
std::vector<T> derivative2(const std::vector<T>& f, double h) {
    const std::size_t n = f.size();
    if (n < 3) throw std::invalid_argument("derivative2: need at least 3 samples");
    std::vector<T> d(n);
    const double ih = 1.0 / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * ih;
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * ih;
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * ih;
    return d;
}

// ---------------------------------------------------------------------------
// Deterministic RNG. splitmix64 plus explicit transforms so that streams are
// identical across platforms and standard-library versions.

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// standard normal via Box-Muller (no library distribution involved)
    double normal() {
        double u1 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Full-precision scientific formatting (17 significant digits) used by all
/// report writers; reproducibility requires round-trip exactness.
inline std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

inline std::vector<double> logspace(double lo, double hi, int count) {
    if (count < 1 || lo <= 0.0 || hi <= 0.0)
        throw std::invalid_argument("logspace: positive bounds and count required");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < count; ++i)
        out[i] = std::exp(la + (lb - la) * i / (count - 1));
    return out;
}

inline double sqr(double x) { return x * x; }

/// Surface area of the unit sphere in R^d.
inline double unit_sphere_area(int d) {
    if (d < 1) throw std::invalid_argument("unit_sphere_area: d >= 1 required");
    return 2.0 * std::pow(3.14159265358979323846264338327950288, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace helmlab
