#ifndef HOLOATLAS_HOLO_HPP
#define HOLOATLAS_HOLO_HPP

// Numerical complex-analysis kernel: trapezoid quadrature on circles,
// winding numbers, Laurent coefficients, Cauchy-Riemann residuals and
// analytic continuation of the logarithm.

#include <holoatlas/error.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace holoatlas {

using Complex = std::complex<double>;
using Coords = std::vector<Complex>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr Complex two_pi_i{0.0, two_pi};

namespace detail {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline bool finite(Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

} // namespace detail

/// Uniform-angle sampling contract for a circle |w - center| = radius.
class CirclePath {
public:
    CirclePath(Complex center, double radius, int samples = 256)
        : center_(center), radius_(radius), samples_(samples) {
        if (!(radius > 0.0) || !std::isfinite(radius))
            throw Error(ErrorKind::InvalidProblem, "circle radius must be positive");
        if (samples < 16 || !detail::is_power_of_two(samples))
            throw Error(ErrorKind::InvalidProblem,
                        "circle samples must be a power of two >= 16, got " + std::to_string(samples));
    }

    Complex center() const noexcept { return center_; }
    double radius() const noexcept { return radius_; }
    int samples() const noexcept { return samples_; }

    double angle(int k) const noexcept { return two_pi * k / samples_; }
    /// Offset from the center of sample k.
    Complex offset(int k) const noexcept { return std::polar(radius_, angle(k)); }
    Complex point(int k) const noexcept { return center_ + offset(k); }

private:
    Complex center_;
    double radius_;
    int samples_;
};

/// Branch selector for the logarithm: log_b(w) = Log(w) + 2*pi*i*b.
struct LogBranch {
    int branch = 0;

    Complex log(Complex w) const { return std::log(w) + two_pi_i * static_cast<double>(branch); }

    friend bool operator==(const LogBranch&, const LogBranch&) = default;
};

template <class Fn>
std::vector<Complex> sample_circle(Fn&& g, const CirclePath& path) {
    std::vector<Complex> values(static_cast<std::size_t>(path.samples()));
    for (int k = 0; k < path.samples(); ++k)
        values[static_cast<std::size_t>(k)] = g(path.point(k));
    return values;
}

/// Winding of the sampled closed curve about 0, before rounding. Throws
/// NonVanishing if some |g| <= vanish_rel * max|g| and Resolution if a
/// single phase step reaches pi/2.
inline double winding_number_real(std::span<const Complex> values, double vanish_rel = 1e-9) {
    if (values.empty())
        throw Error(ErrorKind::InvalidProblem, "no samples");
    double max_abs = 0.0;
    for (Complex v : values) {
        if (!detail::finite(v))
            throw Error(ErrorKind::NonVanishing, "non-finite sample");
        max_abs = std::max(max_abs, std::abs(v));
    }
    const double threshold = vanish_rel * max_abs;
    for (Complex v : values)
        if (!(std::abs(v) > threshold))
            throw Error(ErrorKind::NonVanishing, "function vanishes on the path");

    double total = 0.0;
    const std::size_t n = values.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Complex a = values[k];
        const Complex b = values[(k + 1) % n];
        const double step = std::arg(b / a);
        if (std::abs(step) >= std::numbers::pi / 2)
            throw Error(ErrorKind::Resolution, "phase step " + std::to_string(step) + " too large; raise samples");
        total += step;
    }
    return total / two_pi;
}

template <class Fn>
double winding_number_real(Fn&& g, const CirclePath& path, double vanish_rel = 1e-9) {
    const auto values = sample_circle(g, path);
    return winding_number_real(std::span<const Complex>(values), vanish_rel);
}

inline int round_winding(double raw) {
    const double nearest = std::round(raw);
    if (std::abs(raw - nearest) > 0.1)
        throw Error(ErrorKind::Resolution, "winding " + std::to_string(raw) + " is not near an integer");
    return static_cast<int>(nearest);
}

template <class Fn>
int winding_number(Fn&& g, const CirclePath& path, double vanish_rel = 1e-9) {
    return round_winding(winding_number_real(g, path, vanish_rel));
}

/// n-th Laurent coefficient about path.center() by the trapezoid rule.
template <class Fn>
Complex laurent_coefficient(Fn&& g, const CirclePath& path, int n) {
    Complex sum{0.0, 0.0};
    const double scale = std::pow(path.radius(), -n);
    for (int k = 0; k < path.samples(); ++k)
        sum += g(path.point(k)) * std::polar(scale, -n * path.angle(k));
    return sum / static_cast<double>(path.samples());
}

/// Discrete Fourier coefficients c_l, l in [-M/2, M/2), of equispaced samples
/// v_k = sum_l c_l exp(i l theta_k). Index l is stored at (l mod M).
inline std::vector<Complex> fourier_coefficients(std::span<const Complex> values) {
    const std::size_t m = values.size();
    std::vector<Complex> out(m);
    std::vector<Complex> roots(m);
    for (std::size_t k = 0; k < m; ++k)
        roots[k] = std::polar(1.0, -two_pi * static_cast<double>(k) / static_cast<double>(m));
    for (std::size_t l = 0; l < m; ++l) {
        Complex sum{0.0, 0.0};
        for (std::size_t k = 0; k < m; ++k)
            sum += values[k] * roots[(l * k) % m];
        out[l] = sum / static_cast<double>(m);
    }
    return out;
}

enum class Stencil {
    Central,    ///< four-point central differences, error h^2 |F'''| / 6
    Richardson, ///< central differences at h and h/2 combined to cancel the h^2 term
};

namespace detail {

// Wirtinger d/dzbar of every output component w.r.t. input j, plain central
// differences. Differences are divided by the step actually realized in
// floating point, so maps linear in p[j] are differentiated to rounding.
template <class Fn>
std::vector<Complex> dbar_central(Fn& f, const Coords& p, std::size_t j, double h) {
    const double x = p[j].real();
    const double y = p[j].imag();
    auto at = [&](double re, double im) {
        Coords q = p;
        q[j] = {re, im};
        return f(q);
    };
    const double x_hi = x + h;
    const double x_lo = x - h;
    const double y_hi = y + h;
    const double y_lo = y - h;
    const Coords xp = at(x_hi, y);
    const Coords xm = at(x_lo, y);
    const Coords yp = at(x, y_hi);
    const Coords ym = at(x, y_lo);
    std::vector<Complex> out(xp.size());
    for (std::size_t c = 0; c < out.size(); ++c) {
        const Complex dx = (xp[c] - xm[c]) / (x_hi - x_lo);
        const Complex dy = (yp[c] - ym[c]) / (y_hi - y_lo);
        out[c] = 0.5 * (dx + Complex{0.0, 1.0} * dy);
    }
    return out;
}

} // namespace detail

/// Largest |dF_c/dzbar_j| over output components c and input variables j.
/// Any library error raised while evaluating F is reported as
/// EvaluationOutsideDomain.
template <class Fn>
double cr_residual(Fn&& f, const Coords& p, double h = 1e-4, Stencil stencil = Stencil::Richardson) {
    if (!(h > 0.0))
        throw Error(ErrorKind::InvalidProblem, "step must be positive");
    double worst = 0.0;
    try {
        for (std::size_t j = 0; j < p.size(); ++j) {
            std::vector<Complex> est = detail::dbar_central(f, p, j, h);
            if (stencil == Stencil::Richardson) {
                const std::vector<Complex> half = detail::dbar_central(f, p, j, h / 2);
                for (std::size_t c = 0; c < est.size(); ++c)
                    est[c] = (4.0 * half[c] - est[c]) / 3.0;
            }
            for (Complex e : est)
                worst = std::max(worst, std::abs(e));
        }
    } catch (const Error& e) {
        throw Error(ErrorKind::EvaluationOutsideDomain, e.what());
    }
    return worst;
}

struct LogContinuation {
    LogBranch branch;
    Complex value;
};

/// Continues log along a polyline starting from the branch `start` at
/// path.front(). The returned branch is the one whose value at path.back()
/// equals the continued value.
inline LogContinuation continue_log(std::span<const Complex> path, LogBranch start) {
    if (path.empty())
        throw Error(ErrorKind::InvalidProblem, "empty path");
    for (Complex p : path)
        if (p == Complex{0.0, 0.0})
            throw Error(ErrorKind::PathThroughZero, "path passes through 0");

    double arg = std::arg(path.front()) + two_pi * start.branch;
    for (std::size_t k = 1; k < path.size(); ++k) {
        const double step = std::arg(path[k] / path[k - 1]);
        if (std::abs(step) >= std::numbers::pi / 2)
            throw Error(ErrorKind::StepTooCoarse, "argument step " + std::to_string(step) + " >= pi/2");
        arg += step;
    }
    const Complex end = path.back();
    const int branch = static_cast<int>(std::lround((arg - std::arg(end)) / two_pi));
    return {LogBranch{branch}, Complex{std::log(std::abs(end)), arg}};
}

} // namespace holoatlas

#endif // HOLOATLAS_HOLO_HPP
