#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>

namespace mpinv {

using cpx = std::complex<double>;

inline constexpr cpx I{0.0, 1.0};

// Compensated (Kahan) accumulator for doubles.
class kahan_sum {
  public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Compensated accumulator for complex values (component-wise Kahan).
class kahan_csum {
  public:
    void add(cpx x) {
        re_.add(x.real());
        im_.add(x.imag());
    }
    cpx value() const { return {re_.value(), im_.value()}; }

  private:
    kahan_sum re_, im_;
};

// Distance from a complex point to the real interval [lo, hi].
inline double interval_distance(cpx z, double lo, double hi) {
    double x = std::clamp(z.real(), lo, hi);
    return std::hypot(z.real() - x, z.imag());
}

// splitmix64 step: advances the state and returns the next value.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base;
    (void)splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (stream + 1);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

}  // namespace mpinv
