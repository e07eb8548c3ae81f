#ifndef HOLOATLAS_BUNDLES_HPP
#define HOLOATLAS_BUNDLES_HPP

// Holomorphic vector bundles on the two-chart CP^1 given by a transition
// cocycle G on the overlap annulus, with the convention s1(w) = G(w) s2(1/w)
// for a section (s1 on the w-disk, s2 on the s-disk). O(k) is G = w^k.

#include <holoatlas/atlas.hpp>
#include <holoatlas/error.hpp>
#include <holoatlas/holo.hpp>
#include <holoatlas/surface.hpp>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace holoatlas {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct Cocycle {
    int rank = 1;
    std::function<CMatrix(Complex)> transition;

    CMatrix operator()(Complex w) const { return transition(w); }
};

inline Cocycle o_k_cocycle(int k) {
    return {1, [k](Complex w) {
                CMatrix g(1, 1);
                g(0, 0) = ipow(w, k);
                return g;
            }};
}

inline Cocycle diagonal_cocycle(std::vector<int> k) {
    const int n = static_cast<int>(k.size());
    if (n < 1)
        throw Error(ErrorKind::InvalidProblem, "rank must be at least 1");
    return {n, [k = std::move(k)](Complex w) {
                CMatrix g = CMatrix::Zero(static_cast<Eigen::Index>(k.size()), static_cast<Eigen::Index>(k.size()));
                for (std::size_t i = 0; i < k.size(); ++i)
                    g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = ipow(w, k[i]);
                return g;
            }};
}

/// C G C^{-1}: the same bundle in a constant change of frame.
inline Cocycle conjugated(const Cocycle& c, const CMatrix& frame) {
    const CMatrix inv = frame.inverse();
    return {c.rank, [c, frame, inv](Complex w) -> CMatrix { return frame * c(w) * inv; }};
}

/// Tensor product with O(m).
inline Cocycle twisted(const Cocycle& c, int m) {
    if (m == 0)
        return c;
    return {c.rank, [c, m](Complex w) -> CMatrix { return c(w) * ipow(w, m); }};
}

inline Cocycle dual(const Cocycle& c) {
    return {c.rank, [c](Complex w) -> CMatrix { return c(w).transpose().inverse(); }};
}

/// G multiplied by a nonvanishing scalar function.
inline Cocycle scaled(const Cocycle& c, std::function<Complex(Complex)> g) {
    return {c.rank, [c, g = std::move(g)](Complex w) -> CMatrix { return c(w) * g(w); }};
}

inline Cocycle direct_sum(const Cocycle& a, const Cocycle& b) {
    return {a.rank + b.rank, [a, b](Complex w) {
                CMatrix g = CMatrix::Zero(a.rank + b.rank, a.rank + b.rank);
                g.topLeftCorner(a.rank, a.rank) = a(w);
                g.bottomRightCorner(b.rank, b.rank) = b(w);
                return g;
            }};
}

/// Finite Laurent polynomial: (exponent, coefficient) terms.
using LaurentPoly = std::vector<std::pair<int, Complex>>;

inline Complex evaluate(const LaurentPoly& p, Complex w) {
    Complex acc{};
    for (const auto& [e, c] : p)
        acc += c * ipow(w, e);
    return acc;
}

/// Matrix of Laurent polynomials, entries in row-major order.
struct LaurentMatrix {
    int rank = 1;
    std::vector<LaurentPoly> entries;

    Cocycle to_cocycle() const {
        if (rank < 1 || entries.size() != static_cast<std::size_t>(rank * rank))
            throw Error(ErrorKind::InvalidProblem, "cocycle needs rank*rank entries");
        return {rank, [m = *this](Complex w) {
                    CMatrix g(m.rank, m.rank);
                    for (int i = 0; i < m.rank; ++i)
                        for (int j = 0; j < m.rank; ++j)
                            g(i, j) = evaluate(m.entries[static_cast<std::size_t>(i * m.rank + j)], w);
                    return g;
                }};
    }
};

/// Default circle for cocycle computations: geometric mean of the overlap radii.
inline double default_radius(const Params& p) { return std::sqrt(p.rho0 * p.rho1); }

/// First Chern number: winding of det G counterclockwise around |w| = r.
inline int chern_number(const Cocycle& c, double r, int samples = 256) {
    return winding_number([&](Complex w) { return c(w).determinant(); }, CirclePath({0.0, 0.0}, r, samples));
}

struct SectionSpaceProblem {
    Cocycle cocycle;
    int truncation = 32;
    double radius = std::sqrt(0.2 * 0.5);
    int samples = 256;
    double rank_tol = 1e-9;

    void validate() const {
        if (cocycle.rank < 1 || !cocycle.transition)
            throw Error(ErrorKind::InvalidProblem, "missing cocycle");
        if (truncation < 0)
            throw Error(ErrorKind::InvalidProblem, "truncation must be nonnegative");
        if (samples < 4 * (truncation + 1))
            throw Error(ErrorKind::InvalidProblem, "samples must be at least 4 (N + 1)");
        if (!(rank_tol > 0.0 && rank_tol < 1.0))
            throw Error(ErrorKind::InvalidProblem, "rank_tol must lie in (0, 1)");
        CirclePath(0.0, radius, samples);
    }
};

/// Singular values of the truncated matching system, expressed in the Fourier
/// basis of the sample circle with the chart-1 unknowns eliminated.
///
/// On |w| = r write G = sum_l c_l e^{il theta} (DFT of the samples) and
/// s2(1/w) = sum_j b_j e^{-ij theta}, s1(w) = sum_p a_p e^{ip theta}, with
/// coefficients rescaled by powers of r. Matching mode p reads
/// a_p = sum_j c_{p+j} b_j; for 0 <= p <= N this only defines a_p, so the
/// kernel dimension equals that of the rows p outside [0, N] acting on b.
struct MatchingSpectrum {
    std::vector<double> singular_values; // descending
    Eigen::Index columns = 0;

    int kernel_dimension(double rank_tol) const {
        const double top = singular_values.empty() ? 0.0 : singular_values.front();
        const auto rank = std::count_if(singular_values.begin(), singular_values.end(),
                                        [&](double s) { return s > rank_tol * top; });
        return static_cast<int>(columns - rank);
    }
};

inline MatchingSpectrum matching_spectrum(const Cocycle& c, int truncation, double radius, int samples) {
    const int n = c.rank;
    const int m = samples;
    const CirclePath path({0.0, 0.0}, radius, samples);

    std::vector<CMatrix> values(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        values[static_cast<std::size_t>(k)] = c(path.point(k));
        if (values[static_cast<std::size_t>(k)].rows() != n || values[static_cast<std::size_t>(k)].cols() != n)
            throw Error(ErrorKind::DimensionMismatch, "cocycle returned a matrix of the wrong size");
    }
    std::vector<CMatrix> coeff(static_cast<std::size_t>(m), CMatrix::Zero(n, n));
    std::vector<Complex> series(static_cast<std::size_t>(m));
    double top = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < m; ++k)
                series[static_cast<std::size_t>(k)] = values[static_cast<std::size_t>(k)](i, j);
            const auto f = fourier_coefficients(series);
            for (int l = 0; l < m; ++l) {
                coeff[static_cast<std::size_t>(l)](i, j) = f[static_cast<std::size_t>(l)];
                top = std::max(top, std::abs(f[static_cast<std::size_t>(l)]));
            }
        }
    }

    const int cols_blocks = truncation + 1;
    const double negligible = 1e-14 * top;
    std::vector<int> kept;
    for (int p = truncation + 1; p < m; ++p) {
        double row_max = 0.0;
        for (int j = 0; j < cols_blocks; ++j)
            row_max = std::max(row_max, coeff[static_cast<std::size_t>((p + j) % m)].cwiseAbs().maxCoeff());
        if (row_max > negligible)
            kept.push_back(p);
    }

    MatchingSpectrum out;
    out.columns = static_cast<Eigen::Index>(n) * cols_blocks;
    if (kept.empty())
        return out;
    CMatrix a(static_cast<Eigen::Index>(kept.size()) * n, out.columns);
    for (std::size_t r = 0; r < kept.size(); ++r)
        for (int j = 0; j < cols_blocks; ++j)
            a.block(static_cast<Eigen::Index>(r) * n, static_cast<Eigen::Index>(j) * n, n, n) =
                coeff[static_cast<std::size_t>((kept[r] + j) % m)];

    Eigen::BDCSVD<CMatrix> svd(a);
    const auto& sv = svd.singularValues();
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    return out;
}

/// Kernel dimension for exactly the stated problem, without stability gating.
inline int kernel_dimension(const SectionSpaceProblem& p) {
    p.validate();
    return matching_spectrum(p.cocycle, p.truncation, p.radius, p.samples).kernel_dimension(p.rank_tol);
}

/// Dimension of the space of global holomorphic sections. The value is
/// accepted only if it is unchanged under N -> N + 8 and rank_tol x 10^(+-1).
inline int section_space_dim(const SectionSpaceProblem& p) {
    p.validate();
    const auto base = matching_spectrum(p.cocycle, p.truncation, p.radius, p.samples);
    const int dim = base.kernel_dimension(p.rank_tol);
    const int looser = base.kernel_dimension(p.rank_tol * 10.0);
    const int tighter = base.kernel_dimension(p.rank_tol / 10.0);
    int samples = p.samples;
    while (samples < 4 * (p.truncation + 9))
        samples *= 2;
    const int longer = matching_spectrum(p.cocycle, p.truncation + 8, p.radius, samples).kernel_dimension(p.rank_tol);
    if (dim != looser || dim != tighter || dim != longer)
        throw Error(ErrorKind::RankUnstable, "kernel dimensions " + std::to_string(dim) + "/" + std::to_string(looser) +
                                                 "/" + std::to_string(tighter) + "/" + std::to_string(longer) +
                                                 " disagree across tolerance and truncation");
    return dim;
}

inline SectionSpaceProblem with_cocycle(const SectionSpaceProblem& p, Cocycle c) {
    SectionSpaceProblem out = p;
    out.cocycle = std::move(c);
    return out;
}

/// A line bundle is trivial iff it and its dual both have a nonzero section.
inline bool triviality_check(const SectionSpaceProblem& p) {
    if (p.cocycle.rank != 1)
        throw Error(ErrorKind::InvalidProblem, "triviality check is for line bundles");
    return section_space_dim(p) >= 1 && section_space_dim(with_cocycle(p, dual(p.cocycle))) >= 1;
}

struct SplittingResult {
    std::vector<int> type; ///< nondecreasing k_1 <= ... <= k_n
    std::vector<std::pair<int, int>> profile; ///< (m, h0 of the O(m) twist)
};

/// Splitting type from the twisted section counts h(m), using
/// h(m) - h(m-1) = #{i : k_i >= -m}.
inline SplittingResult splitting_type(const SectionSpaceProblem& p, int m_min, int m_max) {
    p.validate();
    if (m_max <= m_min)
        throw Error(ErrorKind::RangeTooNarrow, "empty twist range");
    const int n = p.cocycle.rank;
    SplittingResult out;
    for (int m = m_min; m <= m_max; ++m)
        out.profile.emplace_back(m, section_space_dim(with_cocycle(p, twisted(p.cocycle, m))));

    const int h_last = out.profile.back().second;
    const int h_prev = out.profile[out.profile.size() - 2].second;
    if (out.profile.front().second != 0 || h_last - h_prev != n)
        throw Error(ErrorKind::RangeTooNarrow, "twist range [" + std::to_string(m_min) + ", " + std::to_string(m_max) +
                                                   "] does not bracket the splitting type");

    int previous = 0; // #{k_i >= -m} at m = m_min, zero since h(m_min) = 0
    for (std::size_t i = 1; i < out.profile.size(); ++i) {
        const int m = out.profile[i].first;
        const int jumps = out.profile[i].second - out.profile[i - 1].second;
        if (jumps < previous || jumps > n)
            throw Error(ErrorKind::SumMismatch, "h0 profile is not convex at m = " + std::to_string(m));
        for (int c = previous; c < jumps; ++c)
            out.type.push_back(-m);
        previous = jumps;
    }
    std::sort(out.type.begin(), out.type.end());
    if (static_cast<int>(out.type.size()) != n)
        throw Error(ErrorKind::SumMismatch, "recovered " + std::to_string(out.type.size()) + " summands for rank " +
                                                std::to_string(n));
    const int degree = chern_number(p.cocycle, p.radius, p.samples);
    const int sum = std::accumulate(out.type.begin(), out.type.end(), 0);
    if (sum != degree)
        throw Error(ErrorKind::SumMismatch,
                    "sum of splitting type " + std::to_string(sum) + " != det winding " + std::to_string(degree));
    return out;
}

/// Splitting type with the twist range widened until it brackets the answer.
inline SplittingResult splitting_type(const SectionSpaceProblem& p) {
    int span = 4;
    for (;;) {
        try {
            return splitting_type(p, -span, span);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::RangeTooNarrow || 2 * span + 2 > p.truncation)
                throw;
            span *= 2;
        }
    }
}

/// Total spaces of the pullbacks agree as bundles iff the sorted tuples agree.
inline bool classify_q(std::vector<int> k, std::vector<int> k_prime) {
    if (k.size() != k_prime.size())
        throw Error(ErrorKind::LengthMismatch, "tuples of different rank");
    std::sort(k.begin(), k.end());
    std::sort(k_prime.begin(), k_prime.end());
    return k == k_prime;
}

/// Random constant frame with entries uniform in the unit square, redrawn
/// until its condition number is at most max_condition.
template <class Rng>
CMatrix random_frame(int n, Rng& rng, double max_condition = 20.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        CMatrix c(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                c(i, j) = Complex{u(rng), u(rng)};
        Eigen::JacobiSVD<CMatrix> svd(c);
        const auto& s = svd.singularValues();
        if (s(n - 1) > 0.0 && s(0) / s(n - 1) <= max_condition)
            return c;
    }
}

// ---------------------------------------------------------------------------
// Canonical bundle.

struct DivisorOrders {
    int sigma; ///< order of sigma along the annulus fiber s = 0
    int bundle; ///< order at s = 0 of the section (1 on the w-disk) of O(-2)
};

inline DivisorOrders canonical_divisor_orders(const Params& params, SigmaFault fault = SigmaFault::None) {
    params.validate();
    const Complex z0 = 0.5 * (1.0 + params.rho2);
    const double r = 1.0;
    const int sigma = sigma_polar_order(params, z0, r, fault);
    const Cocycle o_m2 = o_k_cocycle(-2);
    // chart-2 representative s2(s) = G(1/s)^{-1} s1 with s1 = 1
    const int bundle = winding_number([&](Complex s) { return 1.0 / o_m2(1.0 / s)(0, 0); },
                                      CirclePath({0.0, 0.0}, r, 256));
    return {sigma, bundle};
}

/// Order of the canonical divisor along the annulus fiber; equals that of the
/// pulled-back meromorphic section of O(-2) when the canonical bundle is L_{-2}.
inline int canonical_divisor_check(const Params& params, SigmaFault fault = SigmaFault::None) {
    const auto orders = canonical_divisor_orders(params, fault);
    if (orders.sigma != orders.bundle)
        throw Error(ErrorKind::Mismatch, "sigma has order " + std::to_string(orders.sigma) +
                                             " but the O(-2) section has order " + std::to_string(orders.bundle));
    return orders.sigma;
}

// ---------------------------------------------------------------------------
// Total spaces.

/// Total space of f^* of the bundle with cocycle G, on charts A x C^n,
/// B x C^n and N x C^n. Fiber coordinates follow chart-1 / chart-2
/// trivializations of the base: v_A = G(w) v_B, v_N = v_A.
struct TotalSpaceAtlas {
    Params params;
    Cocycle cocycle;
    AtlasDescription atlas;
    /// The base total space E(xi) over CP^1, charts "1" (w, v) and "2" (s, v).
    AtlasDescription base;
};

namespace detail {

inline PolyDomain fiber_planes(int n) { return PolyDomain(std::vector<RadialConstraint>(static_cast<std::size_t>(n), Plane{})); }

inline CVector tail(const Coords& c, std::size_t from) {
    CVector v(static_cast<Eigen::Index>(c.size() - from));
    for (std::size_t i = from; i < c.size(); ++i)
        v(static_cast<Eigen::Index>(i - from)) = c[i];
    return v;
}

inline Coords join(std::initializer_list<Complex> head, const CVector& v) {
    Coords out(head);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v(i));
    return out;
}

} // namespace detail

inline TotalSpaceAtlas pullback_to_e(const Cocycle& g, const Params& params) {
    params.validate();
    const int n = g.rank;
    const PolyDomain fiber = detail::fiber_planes(n);

    Chart a = surface_chart_a(params);
    a.domain = a.domain.times(fiber);
    Chart b = surface_chart_b(params);
    b.domain = b.domain.times(fiber);
    Chart node = surface_chart_n(params);
    node.domain = node.domain.times(fiber);

    Transition ab{"A<->B",
                  "A",
                  "B",
                  overlap_a_side(params).times(fiber),
                  overlap_b_side(params).times(fiber),
                  [params, g](const Coords& c) {
                      const PointB q = transit_a_to_b(params, {c[0], c[1]});
                      return detail::join({q.z, q.s}, g(c[1]).partialPivLu().solve(detail::tail(c, 2)));
                  },
                  [params, g](const Coords& c) {
                      const Complex w = 1.0 / c[1];
                      return detail::join({c[0] * phi(params, w), w}, g(w) * detail::tail(c, 2));
                  }};
    Transition na{"N<->A",
                  "N",
                  "A",
                  overlap_n_side(params).times(fiber),
                  overlap_a_node_side(params).times(fiber),
                  [](const Coords& c) { return detail::join({c[0], c[0] * c[1]}, detail::tail(c, 2)); },
                  [params](const Coords& c) {
                      const PointN q = transit_a_to_n(params, {c[0], c[1]});
                      return detail::join({q.x, q.y}, detail::tail(c, 2));
                  }};

    Chart one{"1", PolyDomain{Disk{params.rho1}}.times(fiber), {}, {}};
    Chart two{"2", PolyDomain{Disk{1.0 / params.rho0}}.times(fiber), {}, {}};
    Transition base12{"1<->2",
                      "1",
                      "2",
                      PolyDomain{Annulus{params.rho0, params.rho1}}.times(fiber),
                      PolyDomain{Annulus{1.0 / params.rho1, 1.0 / params.rho0}}.times(fiber),
                      [g](const Coords& c) {
                          return detail::join({1.0 / c[0]}, g(c[0]).partialPivLu().solve(detail::tail(c, 1)));
                      },
                      [g](const Coords& c) {
                          const Complex w = 1.0 / c[0];
                          return detail::join({w}, g(w) * detail::tail(c, 1));
                      }};

    return {params, g, AtlasDescription({a, b, node}, {ab, na}),
            AtlasDescription({one, two}, {base12})};
}

inline TotalSpaceAtlas pullback_to_e(const std::vector<int>& k, const Params& params) {
    return pullback_to_e(diagonal_cocycle(k), params);
}

/// pi_k: forget the fiber coordinates.
inline PointRep bundle_projection(const PointRep& p) { return {p.chart, {p.coords[0], p.coords[1]}}; }

/// f~: Q -> E(xi), (point of E, v) -> (f(point), v) in the matching base chart.
inline PointRep lift_to_base_bundle(const PointRep& p) {
    const BasePoint b = fibration_f(from_rep(bundle_projection(p)));
    Coords c{b.value};
    c.insert(c.end(), p.coords.begin() + 2, p.coords.end());
    return {b.chart == 1 ? "1" : "2", std::move(c)};
}

/// xi_k: E(xi) -> CP^1.
inline BasePoint base_bundle_projection(const PointRep& y) { return {y.chart == "1" ? 1 : 2, y.coords[0]}; }

struct SquareReport {
    std::size_t points = 0;
    double max_projection_gap = 0.0; ///< |f(pi(p)) - xi(f~(p))|
    double max_transition_gap = 0.0; ///< |f~(T_Q(p)) - T_xi(f~(p))|
};

/// Checks f o pi_k = xi_k o f~ and that f~ intertwines the chart transitions
/// of Q and E(xi), on `count` random points drawn from the transition domains.
template <class Rng>
SquareReport commuting_square_check(const TotalSpaceAtlas& q, int count, Rng& rng) {
    SquareReport report;
    const auto dirs = q.atlas.directed();
    int attempts = 0;
    while (static_cast<int>(report.points) < count) {
        if (++attempts > 100 * count)
            throw Error(ErrorKind::InvalidProblem, "could not sample enough overlap points");
        const auto& d = dirs[static_cast<std::size_t>(attempts) % dirs.size()];
        const PointRep p{d.source(), q.atlas.chart(d.source()).canonical(random_in(d.domain(), rng))};
        PointRep image;
        try {
            image = transit(p, d.target(), q.atlas);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotInOverlap)
                throw;
            continue;
        }
        const PointRep y = lift_to_base_bundle(p);
        const BasePoint fb = fibration_f(from_rep(bundle_projection(p)));
        const BasePoint xb = base_bundle_projection(y);
        report.max_projection_gap = std::max(report.max_projection_gap, std::abs(fb.value - xb.value) +
                                                                            (fb.chart == xb.chart ? 0.0 : 1.0));

        const PointRep y_image = lift_to_base_bundle(image);
        const PointRep y_moved = y.chart == y_image.chart ? y : transit(y, y_image.chart, q.base);
        report.max_transition_gap = std::max(report.max_transition_gap, max_abs_diff(y_moved.coords, y_image.coords));
        ++report.points;
    }
    return report;
}

} // namespace holoatlas

#endif // HOLOATLAS_BUNDLES_HPP
