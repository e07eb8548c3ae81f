#ifndef HOLOATLAS_SURFACE_HPP
#define HOLOATLAS_SURFACE_HPP

// The surface E(rho1, rho2): a quotient chart A = (C* x D(0, rho1)) / Z over
// the elliptic part, a product chart B = A(1, rho2) x D(1/rho0) over the
// annulus part, and a local chart N at the node of the singular fiber.

#include <holoatlas/atlas.hpp>
#include <holoatlas/error.hpp>
#include <holoatlas/holo.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace holoatlas {

struct Params {
    double rho0 = 0.2;
    double rho1 = 0.5;
    double rho2 = 1.6;
    /// Radius of the polydisk chart around the node.
    double node_radius = 0.3;

    void validate() const {
        const bool chain = rho0 > 0.0 && rho0 < rho1 && rho1 < 1.0 && 1.0 < rho2 && rho2 < 1.0 / rho1;
        if (!chain || !std::isfinite(rho2)) {
            std::ostringstream os;
            os << "need 0 < rho0 < rho1 < 1 < rho2 < 1/rho1, got rho0=" << rho0 << " rho1=" << rho1
               << " rho2=" << rho2;
            throw Error(ErrorKind::InvalidParams, os.str());
        }
        if (!(node_radius > 0.0 && node_radius < 1.0 && node_radius * node_radius < rho1))
            throw Error(ErrorKind::InvalidParams, "node chart radius must satisfy eps^2 < rho1");
    }
};

struct PointA {
    Complex z;
    Complex w;
};
struct PointB {
    Complex z;
    Complex s;
};
struct PointN {
    Complex x;
    Complex y;
};

using EPoint = std::variant<PointA, PointB, PointN>;

inline const char* chart_id(const EPoint& p) {
    switch (p.index()) {
    case 0: return "A";
    case 1: return "B";
    default: return "N";
    }
}

inline PointRep to_rep(const EPoint& p) {
    return std::visit(
        [](const auto& q) -> PointRep {
            using Q = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<Q, PointA>)
                return {"A", {q.z, q.w}};
            else if constexpr (std::is_same_v<Q, PointB>)
                return {"B", {q.z, q.s}};
            else
                return {"N", {q.x, q.y}};
        },
        p);
}

inline EPoint from_rep(const PointRep& r) {
    if (r.coords.size() < 2)
        throw Error(ErrorKind::DimensionMismatch, "surface points have two coordinates");
    if (r.chart == "A")
        return PointA{r.coords[0], r.coords[1]};
    if (r.chart == "B")
        return PointB{r.coords[0], r.coords[1]};
    if (r.chart == "N")
        return PointN{r.coords[0], r.coords[1]};
    throw Error(ErrorKind::InvalidProblem, "unknown chart " + r.chart);
}

/// z^n for integer n by repeated squaring.
inline Complex ipow(Complex z, long n) {
    if (n < 0)
        return 1.0 / ipow(z, -n);
    Complex result{1.0, 0.0};
    while (n > 0) {
        if (n & 1)
            result *= z;
        z *= z;
        n >>= 1;
    }
    return result;
}

/// phi(w) = exp((log w)^2 / (4 pi i) - (log w) / 2) on the branch of log
/// selected by `branch`. Successive branches differ by a factor w.
inline Complex phi(const Params& params, Complex w, LogBranch branch = {}) {
    const double a = std::abs(w);
    if (!(params.rho0 < a && a < params.rho1))
        throw Error(ErrorKind::OutsideAnnulus, "phi needs rho0 < |w| < rho1");
    const Complex L = branch.log(w);
    return std::exp(L * L / (2.0 * two_pi_i) - 0.5 * L);
}

struct NormalizedA {
    PointA point;
    long exponent; ///< n with point.z = z * w^n
};

inline bool is_canonical_a(Complex z, Complex w) {
    const double a = std::abs(z);
    const double r = std::sqrt(std::abs(w));
    return r < a && a <= 1.0 / r;
}

/// Representative of the Z-orbit {(z w^n, w)} with |w|^(1/2) < |z| <= |w|^(-1/2).
inline NormalizedA normalize_a(Complex z, Complex w) {
    const double aw = std::abs(w);
    if (z == Complex{} || !(aw > 0.0 && aw < 1.0))
        throw Error(ErrorKind::OutsideDomain, "normalization needs z != 0 and 0 < |w| < 1");
    if (is_canonical_a(z, w))
        return {{z, w}, 0};
    const double lw = std::log(aw);
    long n = static_cast<long>(std::ceil(-0.5 - std::log(std::abs(z)) / lw));
    Complex zn = z * ipow(w, n);
    for (int guard = 0; guard < 4 && !is_canonical_a(zn, w); ++guard) {
        n += std::abs(zn) > 1.0 ? 1 : -1;
        zn = z * ipow(w, n);
    }
    return {{zn, w}, n};
}

/// Representative of (z, w) whose z is closest to ref_z in log-modulus.
inline Complex align_a(Complex z, Complex w, Complex ref_z) {
    const double lw = std::log(std::abs(w));
    const long n = std::lround((std::log(std::abs(ref_z)) - std::log(std::abs(z))) / lw);
    return z * ipow(w, n);
}

/// pi o Phi: the point (z phi(w), w) of chart A, canonically normalized.
inline PointA big_phi(const Params& params, Complex z, Complex w, LogBranch branch = {}) {
    const double az = std::abs(z);
    if (!(1.0 < az && az < params.rho2))
        throw Error(ErrorKind::OutsideDomain, "big_phi needs 1 < |z| < rho2");
    return normalize_a(z * phi(params, w, branch), w).point;
}

inline constexpr int branch_search_radius = 8;

/// Branches b with z / phi(w, b) in the annulus 1 < |u| < rho2.
inline std::vector<int> admissible_branches(const Params& params, Complex z, Complex w,
                                            int radius = branch_search_radius) {
    const double aw = std::abs(w);
    if (!(params.rho0 < aw && aw < params.rho1))
        throw Error(ErrorKind::OutsideAnnulus, "phi needs rho0 < |w| < rho1");
    // log|phi(w, b)| is the real part of the exponent on branch b
    const double log_z = std::log(std::abs(z));
    std::vector<int> out;
    for (int b = -radius; b <= radius; ++b) {
        const Complex L = LogBranch{b}.log(w);
        const double log_u = log_z - (L * L / (2.0 * two_pi_i) - 0.5 * L).real();
        if (0.0 < log_u && log_u < std::log(params.rho2))
            out.push_back(b);
    }
    return out;
}

/// Inverse of pi o Phi followed by j(u, t) = (u, 1/t).
inline PointB transit_a_to_b(const Params& params, const PointA& p) {
    const double aw = std::abs(p.w);
    if (!(params.rho0 < aw && aw < params.rho1))
        throw Error(ErrorKind::NotInV1, "|w| outside (rho0, rho1)");
    if (p.z == Complex{})
        throw Error(ErrorKind::NotInV1, "z = 0");
    const PointA c = normalize_a(p.z, p.w).point;
    const auto branches = admissible_branches(params, c.z, c.w);
    if (branches.empty())
        throw Error(ErrorKind::NotInV1, "no branch of phi lands in the gluing annulus");
    if (branches.size() > 1)
        throw Error(ErrorKind::BranchAmbiguity, "more than one admissible branch");
    return {c.z / phi(params, c.w, LogBranch{branches.front()}), 1.0 / c.w};
}

inline PointA transit_b_to_a(const Params& params, const PointB& p) {
    const double as = std::abs(p.s);
    if (!(1.0 / params.rho1 < as && as < 1.0 / params.rho0))
        throw Error(ErrorKind::NotInOverlap, "|s| outside (1/rho1, 1/rho0)");
    return big_phi(params, p.z, 1.0 / p.s);
}

/// Local model at the node: z = x, w = x y.
inline PointA transit_n_to_a(const Params& params, const PointN& p) {
    if (p.x == Complex{} || p.y == Complex{})
        throw Error(ErrorKind::NotInOverlap, "the nodal fiber x y = 0 is only visible in chart N");
    (void)params;
    return normalize_a(p.x, p.x * p.y).point;
}

inline PointN transit_a_to_n(const Params& params, const PointA& p) {
    const double eps = params.node_radius;
    const double aw = std::abs(p.w);
    if (!(aw > 0.0 && aw < eps * eps) || p.z == Complex{})
        throw Error(ErrorKind::NotInOverlap, "fiber not covered by the node chart");
    // x = z w^n with |w| / eps < |x| < eps has at most one solution n.
    const double lw = std::log(aw);
    const long n0 = static_cast<long>(std::floor((std::log(eps) - std::log(std::abs(p.z))) / lw)) + 1;
    for (long n = n0 - 1; n <= n0 + 1; ++n) {
        const Complex x = p.z * ipow(p.w, n);
        const double ax = std::abs(x);
        if (ax < eps && aw / ax < eps)
            return {x, p.w / x};
    }
    throw Error(ErrorKind::NotInOverlap, "point lies outside the node chart");
}

/// Random point of V1 in chart A: the image of a random (u, t) in
/// A(1, rho2) x A(rho0, rho1) under pi o Phi.
template <class Rng>
PointA random_overlap_point(const Params& params, Rng& rng) {
    const Complex u = random_in(Annulus{1.0, params.rho2}, rng);
    const Complex t = random_in(Annulus{params.rho0, params.rho1}, rng);
    return big_phi(params, u, t);
}

inline Chart surface_chart_a(const Params& params) {
    return Chart{"A", PolyDomain{PuncturedPlane{}, Annulus{0.0, params.rho1}},
                 [](const Coords& c) {
                     Coords out = c;
                     out[0] = normalize_a(c[0], c[1]).point.z;
                     return out;
                 },
                 [](const Coords& c, const Coords& ref) {
                     Coords out = c;
                     out[0] = align_a(c[0], c[1], ref[0]);
                     return out;
                 }};
}

inline Chart surface_chart_b(const Params& params) {
    return Chart{"B", PolyDomain{Annulus{1.0, params.rho2}, Disk{1.0 / params.rho0}}, {}, {}};
}

inline Chart surface_chart_n(const Params& params) {
    return Chart{"N", PolyDomain{Disk{params.node_radius}, Disk{params.node_radius}}, {}, {}};
}

/// Overlap domains of the two gluings, in the coordinates of each side.
inline PolyDomain overlap_a_side(const Params& p) { return {PuncturedPlane{}, Annulus{p.rho0, p.rho1}}; }
inline PolyDomain overlap_b_side(const Params& p) {
    return {Annulus{1.0, p.rho2}, Annulus{1.0 / p.rho1, 1.0 / p.rho0}};
}
inline PolyDomain overlap_n_side(const Params& p) {
    return {Annulus{0.0, p.node_radius}, Annulus{0.0, p.node_radius}};
}
inline PolyDomain overlap_a_node_side(const Params& p) {
    return {PuncturedPlane{}, Annulus{0.0, p.node_radius * p.node_radius}};
}

/// Atlas of E with charts A, B, N and transitions A<->B, N<->A. The B->A
/// direction returns the un-normalized (z phi(1/s), 1/s); transit normalizes.
inline AtlasDescription make_surface_atlas(const Params& params) {
    params.validate();
    Transition ab{"A<->B",
                  "A",
                  "B",
                  overlap_a_side(params),
                  overlap_b_side(params),
                  [params](const Coords& c) {
                      const PointB b = transit_a_to_b(params, {c[0], c[1]});
                      return Coords{b.z, b.s};
                  },
                  [params](const Coords& c) {
                      const Complex w = 1.0 / c[1];
                      return Coords{c[0] * phi(params, w), w};
                  }};
    Transition na{"N<->A",
                  "N",
                  "A",
                  overlap_n_side(params),
                  overlap_a_node_side(params),
                  [](const Coords& c) { return Coords{c[0], c[0] * c[1]}; },
                  [params](const Coords& c) {
                      const PointN n = transit_a_to_n(params, {c[0], c[1]});
                      return Coords{n.x, n.y};
                  }};
    return AtlasDescription({surface_chart_a(params), surface_chart_b(params), surface_chart_n(params)},
                            {std::move(ab), std::move(na)});
}

// ---------------------------------------------------------------------------
// Fibration over CP^1 = D(rho1) u_h D(1/rho0), h(w) = 1/w.

struct BasePoint {
    int chart; ///< 1: coordinate w, 2: coordinate s = 1/w
    Complex value;

    /// Same point in the other base chart; undefined at w = 0 or s = 0.
    BasePoint other() const { return {chart == 1 ? 2 : 1, 1.0 / value}; }
};

inline BasePoint fibration_f(const EPoint& p) {
    return std::visit(
        [](const auto& q) -> BasePoint {
            using Q = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<Q, PointA>)
                return {1, q.w};
            else if constexpr (std::is_same_v<Q, PointB>)
                return {2, q.s};
            else
                return {1, q.x * q.y};
        },
        p);
}

struct EllipticFiber {
    Complex q; ///< the fiber is C* / q^Z
};
struct AnnulusFiber {
    Complex s;
};
struct NodalFiber {};

using FiberClass = std::variant<EllipticFiber, AnnulusFiber, NodalFiber>;

inline FiberClass fiber_class(const Params& params, const BasePoint& base) {
    if (base.chart == 1) {
        const Complex w = base.value;
        if (w == Complex{})
            return NodalFiber{};
        if (std::abs(w) < params.rho1)
            return EllipticFiber{w};
        return AnnulusFiber{1.0 / w};
    }
    const Complex s = base.value;
    if (std::abs(s) > 1.0 / params.rho1)
        return EllipticFiber{1.0 / s};
    return AnnulusFiber{s};
}

// ---------------------------------------------------------------------------
// Moduli of the elliptic fibers.

/// sum of d^3 over divisors d of n
inline double divisor_cube_sum(int n) {
    double s = 0.0;
    for (int d = 1; d * d <= n; ++d) {
        if (n % d != 0)
            continue;
        s += std::pow(d, 3);
        if (d != n / d)
            s += std::pow(n / d, 3);
    }
    return s;
}

inline constexpr int j_default_terms = 64;

/// Klein j of the Tate curve C* / q^Z from j = E4^3 / Delta with
/// E4 = 1 + 240 sum sigma_3(n) q^n and Delta = q prod (1 - q^n)^24.
inline Complex j_invariant(Complex q, int terms = j_default_terms, double tail_tol = 1e-10) {
    const double aq = std::abs(q);
    if (!(aq > 0.0 && aq < 1.0))
        throw Error(ErrorKind::OutsideDomain, "j needs 0 < |q| < 1");
    if (terms < 1)
        throw Error(ErrorKind::InvalidProblem, "need at least one term");
    Complex e4{1.0, 0.0};
    Complex prod{1.0, 0.0};
    Complex qn{1.0, 0.0};
    Complex last_e4{};
    for (int n = 1; n <= terms; ++n) {
        qn *= q;
        last_e4 = 240.0 * divisor_cube_sum(n) * qn;
        e4 += last_e4;
        prod *= std::pow(1.0 - qn, 24);
    }
    const double tail = std::max(std::abs(last_e4) / std::abs(e4), 24.0 * std::abs(qn));
    if (!(tail < tail_tol))
        throw Error(ErrorKind::TruncationInsufficient, "q-series tail " + std::to_string(tail) + " too large");
    return e4 * e4 * e4 / (q * prod);
}

/// j of the elliptic fiber over base coordinate w.
inline Complex fiber_modulus(const Params& params, Complex w, int terms = j_default_terms) {
    const double a = std::abs(w);
    if (!(a > 0.0 && a < params.rho1))
        throw Error(ErrorKind::SweepOutsideDomain, "elliptic fibers lie over 0 < |w| < rho1");
    return j_invariant(w, terms);
}

// ---------------------------------------------------------------------------
// The 2-form sigma = dz ^ dw / z and its divisor.

/// Deliberate corruptions of sigma, used to exercise failure paths.
enum class SigmaFault {
    None,
    ChartASquared,    ///< 1/z^2 in chart A
    ChartBSimplePole, ///< -1/(z s) in chart B
};

struct SigmaValue {
    std::string chart;
    Complex coefficient; ///< sigma = coefficient * d(first) ^ d(second)
};

inline Complex sigma_coefficient_a(Complex z, SigmaFault fault = SigmaFault::None) {
    return fault == SigmaFault::ChartASquared ? 1.0 / (z * z) : 1.0 / z;
}

inline Complex sigma_coefficient_b(Complex z, Complex s, SigmaFault fault = SigmaFault::None) {
    if (s == Complex{})
        throw Error(ErrorKind::OnPolarSet, "sigma has a pole along s = 0");
    if (fault == SigmaFault::ChartBSimplePole)
        return -1.0 / (z * s);
    return -1.0 / (z * s * s);
}

/// In chart N, sigma pulls back through z = x, w = x y to dx ^ dy.
inline Complex sigma_coefficient_n(SigmaFault = SigmaFault::None) { return {1.0, 0.0}; }

inline SigmaValue sigma_eval(const EPoint& p, SigmaFault fault = SigmaFault::None) {
    return std::visit(
        [fault](const auto& q) -> SigmaValue {
            using Q = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<Q, PointA>)
                return {"A", sigma_coefficient_a(q.z, fault)};
            else if constexpr (std::is_same_v<Q, PointB>)
                return {"B", sigma_coefficient_b(q.z, q.s, fault)};
            else
                return {"N", sigma_coefficient_n(fault)};
        },
        p);
}

/// Central-difference Jacobian determinant of a map C^2 -> C^2.
template <class Fn>
Complex jacobian_det2(Fn&& f, Complex a, Complex b, double h) {
    auto d = [&](int var) {
        const Complex da = var == 0 ? Complex{h, 0.0} : Complex{};
        const Complex db = var == 1 ? Complex{h, 0.0} : Complex{};
        const Coords plus = f(a + da, b + db);
        const Coords minus = f(a - da, b - db);
        return std::pair{(plus[0] - minus[0]) / (2.0 * h), (plus[1] - minus[1]) / (2.0 * h)};
    };
    const auto [f0a, f1a] = d(0);
    const auto [f0b, f1b] = d(1);
    return f0a * f1b - f0b * f1a;
}

inline constexpr double sigma_check_step = 5e-6;

/// |sigma_A(p) - sigma_B(T(p)) det J_T(p)| for T the A->B transition at a
/// chart A point p of the overlap.
inline double sigma_transition_check(const Params& params, const PointA& p, double h = sigma_check_step,
                                     SigmaFault fault = SigmaFault::None) {
    auto t = [&](Complex z, Complex w) {
        const PointB b = transit_a_to_b(params, {z, w});
        return Coords{b.z, b.s};
    };
    const PointB image = transit_a_to_b(params, p);
    const Complex det = jacobian_det2(t, p.z, p.w, h);
    return std::abs(sigma_coefficient_a(p.z, fault) - sigma_coefficient_b(image.z, image.s, fault) * det);
}

/// |sigma_N(p) - sigma_A(T(p)) det J_T(p)| for T the N->A transition.
inline double sigma_node_check(const Params& params, const PointN& p, double h = sigma_check_step,
                               SigmaFault fault = SigmaFault::None) {
    auto t = [&](Complex x, Complex y) { return Coords{x, x * y}; };
    transit_n_to_a(params, p); // domain check
    // sigma_A is invariant under the Z-action, so the raw representative x may be used.
    const Complex det = jacobian_det2(t, p.x, p.y, h);
    return std::abs(sigma_coefficient_n(fault) - sigma_coefficient_a(p.x, fault) * det);
}

/// Winding of s -> sigma_B(z0, s) around |s| = r, before rounding.
inline double sigma_polar_order_real(const Params& params, Complex z0, double r, SigmaFault fault = SigmaFault::None,
                                     int samples = 256) {
    const double az = std::abs(z0);
    if (!(1.0 < az && az < params.rho2))
        throw Error(ErrorKind::OutsideDomain, "z0 must lie in the chart B annulus");
    if (!(r > 0.0 && r < 1.0 / params.rho0))
        throw Error(ErrorKind::OutsideDomain, "need 0 < r < 1/rho0");
    return winding_number_real([&](Complex s) { return sigma_coefficient_b(z0, s, fault); },
                               CirclePath({0.0, 0.0}, r, samples));
}

inline int sigma_polar_order(const Params& params, Complex z0, double r, SigmaFault fault = SigmaFault::None) {
    return round_winding(sigma_polar_order_real(params, z0, r, fault));
}

// ---------------------------------------------------------------------------
// Pullbacks of rational functions along f.

/// r(w) = num(w) / den(w), coefficients in ascending powers of the chart-1
/// base coordinate w.
struct Rational {
    std::vector<Complex> num;
    std::vector<Complex> den;
};

struct MeroValue {
    Complex value;
    bool pole = false;
};

namespace detail {

inline std::vector<Complex> trimmed(std::vector<Complex> c) {
    while (!c.empty() && c.back() == Complex{})
        c.pop_back();
    return c;
}

inline Complex horner(const std::vector<Complex>& c, Complex x) {
    Complex acc{};
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        acc = acc * x + *it;
    return acc;
}

inline double coeff_scale(const std::vector<Complex>& c) {
    double s = 0.0;
    for (Complex v : c)
        s += std::abs(v);
    return s;
}

} // namespace detail

/// f^* r: the meromorphic function p -> r(f(p)) on E.
class MeromorphicPullback {
public:
    explicit MeromorphicPullback(Rational r)
        : num_(detail::trimmed(std::move(r.num))), den_(detail::trimmed(std::move(r.den))) {
        if (den_.empty())
            throw Error(ErrorKind::InvalidProblem, "denominator is identically zero");
    }

    MeroValue at_base(const BasePoint& b) const {
        if (num_.empty())
            return {{0.0, 0.0}, false};
        Complex n;
        Complex d;
        int shift = 0;
        if (b.chart == 1) {
            n = detail::horner(num_, b.value);
            d = detail::horner(den_, b.value);
        } else {
            // r(1/s) = s^(deg den - deg num) * rev(num)(s) / rev(den)(s)
            const std::vector<Complex> rn(num_.rbegin(), num_.rend());
            const std::vector<Complex> rd(den_.rbegin(), den_.rend());
            n = detail::horner(rn, b.value);
            d = detail::horner(rd, b.value);
            shift = static_cast<int>(den_.size()) - static_cast<int>(num_.size());
        }
        const double tiny_n = 1e-14 * detail::coeff_scale(num_) * std::max(1.0, std::pow(std::abs(b.value), num_.size()));
        const double tiny_d = 1e-14 * detail::coeff_scale(den_) * std::max(1.0, std::pow(std::abs(b.value), den_.size()));
        const bool n_zero = std::abs(n) <= tiny_n;
        const bool d_zero = std::abs(d) <= tiny_d;
        if (n_zero && d_zero)
            throw Error(ErrorKind::IndeterminateAtPoint, "numerator and denominator both vanish");
        if (d_zero)
            return {{}, true};
        const Complex ratio = n / d;
        if (shift == 0)
            return {ratio, false};
        if (b.value == Complex{})
            return shift > 0 ? MeroValue{{}, false} : MeroValue{{}, true};
        return {ratio * ipow(b.value, shift), false};
    }

    MeroValue operator()(const EPoint& p) const { return at_base(fibration_f(p)); }

private:
    std::vector<Complex> num_;
    std::vector<Complex> den_;
};

inline MeromorphicPullback meromorphic_pullback(Rational r) { return MeromorphicPullback(std::move(r)); }

} // namespace holoatlas

#endif // HOLOATLAS_SURFACE_HPP
