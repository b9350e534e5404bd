#ifndef MPINV_SRC_DAMPING_HPP
#define MPINV_SRC_DAMPING_HPP

#include <algorithm>
#include <complex>
#include <limits>

namespace mpinv::detail {

// Adaptive relaxation controller shared by the damped fixed-point solvers.
//
// The solvers iterate x <- (1-w) x + w F(x) with a complex weight w.  Near
// a solution the error contracts by the multiplier M(w) = 1 - w (1 -
// F'(x*)), and the ratio q of successive complex residuals F(x) - x
// measures M(w) directly.  Once q has been steady for several steps the
// controller jumps to the weight annihilating M, i.e. w = 1/(1 - F'), with
// the magnitude clamped to [floor, cap].  A real weight cannot do this: for
// a rotational multiplier (F' near the positive imaginary axis, the typical
// regime just outside the spectral edge) the best real weight still leaves
// |M| ~ 1/2 and the tail crawls, while the complex optimum cuts the
// residual by the ratio-measurement error per step.  A misjudged jump is
// caught by the growth rule below.
//
// Outside the steady regime two fallback rules act on the residual
// magnitude:
//   * three consecutive increases halve w, but never below
//     damping_init/64: when the path climbs through a residual hill on its
//     way to the solution (typical just inside the spectral edge), the
//     residual grows at every positive step size, and halving without a
//     floor would freeze the iterate mid-hill;
//   * a ten-step window without improvement during which the growth rule
//     stayed quiet marks a periodic orbit of the map; halving (with no
//     floor here, orbits can need deep cuts) breaks the cycle, after which
//     the steady-ratio rule retunes the weight.
class DampingSchedule {
  public:
    // Largest admissible weight magnitude: beyond this an annihilating jump
    // would rely on ratio estimates for multipliers within 1/4 of 1, too
    // noisy to extrapolate through.
    static constexpr double kWeightCap = 4.0;

    explicit DampingSchedule(double init)
        : omega_(init), floor_(init / 64.0) {}

    std::complex<double> omega() const { return omega_; }

    void observe(std::complex<double> r) {
        double residual = std::abs(r);

        if (has_prev_r_ && std::abs(prev_r_) > 0.0) {
            std::complex<double> q = r / prev_r_;
            if (stable_count_ > 0 && std::abs(q - last_q_) <= 0.05 * std::abs(q))
                ++stable_count_;
            else
                stable_count_ = 1;
            last_q_ = q;
            if (stable_count_ >= 6 && std::abs(q) < 1.0) {
                std::complex<double> u = (1.0 - q) / omega_;
                if (std::norm(u) > 0.0) {
                    std::complex<double> target = std::conj(u) / std::norm(u);
                    double mag = std::clamp(std::abs(target), floor_, kWeightCap);
                    target *= mag / std::abs(target);
                    if (std::abs(target - omega_) > 0.1 * std::abs(omega_))
                        omega_ = target;
                }
                stable_count_ = 1;
            }
        }
        prev_r_ = r;
        has_prev_r_ = true;

        if (residual > prev_residual_) {
            if (++growth_streak_ >= 3) {
                growth_streak_ = 0;
                growth_fired_in_window_ = true;
                if (std::abs(omega_) > floor_)
                    omega_ *= std::max(floor_, 0.5 * std::abs(omega_)) /
                              std::abs(omega_);
            }
        } else {
            growth_streak_ = 0;
        }
        window_best_ = std::min(window_best_, residual);
        if (++window_pos_ >= 10) {
            if (!(window_best_ < prev_window_best_) && !growth_fired_in_window_)
                omega_ *= 0.5;
            prev_window_best_ = window_best_;
            window_best_ = std::numeric_limits<double>::infinity();
            window_pos_ = 0;
            growth_fired_in_window_ = false;
        }
        prev_residual_ = residual;
    }

  private:
    std::complex<double> omega_;
    double floor_;
    std::complex<double> prev_r_;
    std::complex<double> last_q_;
    bool has_prev_r_ = false;
    int stable_count_ = 0;
    double prev_residual_ = std::numeric_limits<double>::infinity();
    double window_best_ = std::numeric_limits<double>::infinity();
    double prev_window_best_ = std::numeric_limits<double>::infinity();
    int growth_streak_ = 0;
    int window_pos_ = 0;
    bool growth_fired_in_window_ = false;
};

}  // namespace mpinv::detail

#endif
