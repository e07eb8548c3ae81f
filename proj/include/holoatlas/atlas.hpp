#ifndef HOLOATLAS_ATLAS_HPP
#define HOLOATLAS_ATLAS_HPP

// Complex manifolds presented by charts with product domains and two-way
// transition maps, plus grid-based certification of the transitions.

#include <holoatlas/error.hpp>
#include <holoatlas/holo.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace holoatlas {

struct Disk {
    double r;
};
struct Annulus {
    double r0;
    double r1;
};
struct PuncturedPlane {};
struct Plane {};

using RadialConstraint = std::variant<Disk, Annulus, PuncturedPlane, Plane>;

inline bool satisfies(const RadialConstraint& c, Complex v) {
    const double a = std::abs(v);
    return std::visit(
        [a](const auto& k) -> bool {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Disk>)
                return a < k.r;
            else if constexpr (std::is_same_v<K, Annulus>)
                return k.r0 < a && a < k.r1;
            else if constexpr (std::is_same_v<K, PuncturedPlane>)
                return a > 0.0 && std::isfinite(a);
            else
                return std::isfinite(a);
        },
        c);
}

/// Product of open radial constraints, one per coordinate.
class PolyDomain {
public:
    PolyDomain() = default;
    PolyDomain(std::initializer_list<RadialConstraint> factors) : PolyDomain(std::vector(factors)) {}
    explicit PolyDomain(std::vector<RadialConstraint> factors) : factors_(std::move(factors)) {
        for (const auto& f : factors_) {
            if (const auto* d = std::get_if<Disk>(&f); d && !(d->r > 0.0))
                throw Error(ErrorKind::InvalidProblem, "disk radius must be positive");
            if (const auto* a = std::get_if<Annulus>(&f); a && !(a->r0 >= 0.0 && a->r0 < a->r1))
                throw Error(ErrorKind::InvalidProblem, "annulus needs 0 <= r0 < r1");
        }
    }

    std::size_t dimension() const noexcept { return factors_.size(); }
    const std::vector<RadialConstraint>& factors() const noexcept { return factors_; }

    bool contains(const Coords& c) const {
        if (c.size() != factors_.size())
            throw Error(ErrorKind::DimensionMismatch,
                        "expected " + std::to_string(factors_.size()) + " coordinates, got " + std::to_string(c.size()));
        for (std::size_t i = 0; i < c.size(); ++i)
            if (!satisfies(factors_[i], c[i]))
                return false;
        return true;
    }

    PolyDomain times(const PolyDomain& other) const {
        auto f = factors_;
        f.insert(f.end(), other.factors_.begin(), other.factors_.end());
        return PolyDomain(std::move(f));
    }

private:
    std::vector<RadialConstraint> factors_;
};

using MapFn = std::function<Coords(const Coords&)>;
using AlignFn = std::function<Coords(const Coords&, const Coords&)>;

struct Chart {
    std::string id;
    PolyDomain domain;
    /// Canonical representative of a point; identity unless the chart is a quotient.
    MapFn normalize;
    /// Representative of the first argument nearest the second; identity unless
    /// the chart is a quotient.
    AlignFn align;

    std::size_t dimension() const noexcept { return domain.dimension(); }

    Coords canonical(const Coords& c) const { return normalize ? normalize(c) : c; }
    Coords aligned(const Coords& c, const Coords& ref) const { return align ? align(c, ref) : c; }
};

/// Two-way transition between charts `from` and `to`. `overlap` is the
/// domain of `forward` in `from` coordinates and `image` the domain of
/// `backward` in `to` coordinates. A map may still throw for a point of its
/// domain that lies outside the true overlap.
struct Transition {
    std::string name;
    std::string from;
    std::string to;
    PolyDomain overlap;
    PolyDomain image;
    MapFn forward;
    MapFn backward;
};

struct PointRep {
    std::string chart;
    Coords coords;
};

/// One direction of a registered transition.
struct DirectedTransition {
    const Transition* transition;
    bool reversed;

    const std::string& source() const { return reversed ? transition->to : transition->from; }
    const std::string& target() const { return reversed ? transition->from : transition->to; }
    const PolyDomain& domain() const { return reversed ? transition->image : transition->overlap; }
    const MapFn& map() const { return reversed ? transition->backward : transition->forward; }
    std::string label() const { return source() + "->" + target(); }
};

class AtlasDescription {
public:
    AtlasDescription(std::vector<Chart> charts, std::vector<Transition> transitions)
        : charts_(std::move(charts)), transitions_(std::move(transitions)) {
        for (const auto& c : charts_)
            if (c.dimension() < 1)
                throw Error(ErrorKind::InvalidProblem, "chart " + c.id + " has dimension 0");
        for (const auto& t : transitions_) {
            const Chart& a = chart(t.from);
            const Chart& b = chart(t.to);
            if (t.overlap.dimension() != a.dimension() || t.image.dimension() != b.dimension())
                throw Error(ErrorKind::DimensionMismatch, "transition " + t.name + " domains do not match its charts");
            if (!t.forward || !t.backward)
                throw Error(ErrorKind::InvalidProblem, "transition " + t.name + " lacks a map");
        }
    }

    const std::vector<Chart>& charts() const noexcept { return charts_; }
    const std::vector<Transition>& transitions() const noexcept { return transitions_; }

    const Chart& chart(const std::string& id) const {
        for (const auto& c : charts_)
            if (c.id == id)
                return c;
        throw Error(ErrorKind::InvalidProblem, "unknown chart " + id);
    }

    std::optional<DirectedTransition> find(const std::string& from, const std::string& to) const {
        for (const auto& t : transitions_) {
            if (t.from == from && t.to == to)
                return DirectedTransition{&t, false};
            if (t.to == from && t.from == to)
                return DirectedTransition{&t, true};
        }
        return std::nullopt;
    }

    std::vector<DirectedTransition> directed() const {
        std::vector<DirectedTransition> out;
        for (const auto& t : transitions_) {
            out.push_back({&t, false});
            out.push_back({&t, true});
        }
        return out;
    }

private:
    std::vector<Chart> charts_;
    std::vector<Transition> transitions_;
};

inline bool in_domain(const Chart& chart, const Coords& coords) { return chart.domain.contains(coords); }

namespace detail {

inline bool is_domain_failure(ErrorKind k) {
    return k == ErrorKind::NotInOverlap || k == ErrorKind::NotInV1 || k == ErrorKind::OutsideDomain ||
           k == ErrorKind::OutsideAnnulus;
}

// Applies a directed transition, mapping domain failures to NotInOverlap.
inline Coords apply(const AtlasDescription& atlas, const DirectedTransition& d, const Coords& p) {
    if (!d.domain().contains(p))
        throw Error(ErrorKind::NotInOverlap, "point outside the " + d.label() + " overlap");
    Coords q;
    try {
        q = d.map()(p);
    } catch (const Error& e) {
        if (is_domain_failure(e.kind()))
            throw Error(ErrorKind::NotInOverlap, e.what());
        throw;
    }
    const Chart& target = atlas.chart(d.target());
    q = target.canonical(q);
    if (!target.domain.contains(q))
        throw Error(ErrorKind::NotInOverlap, d.label() + " image leaves chart " + target.id);
    return q;
}

} // namespace detail

/// Re-expresses p in chart `target`, canonically normalized there.
inline PointRep transit(const PointRep& p, const std::string& target, const AtlasDescription& atlas) {
    const Chart& source = atlas.chart(p.chart);
    if (p.coords.size() != source.dimension())
        throw Error(ErrorKind::DimensionMismatch, "point does not match chart " + source.id);
    if (!source.domain.contains(p.coords))
        throw Error(ErrorKind::NotInOverlap, "point is not in chart " + source.id);
    if (p.chart == target)
        return {target, source.canonical(p.coords)};
    const auto d = atlas.find(p.chart, target);
    if (!d)
        throw Error(ErrorKind::NoTransitionRegistered, p.chart + "->" + target);
    return {target, detail::apply(atlas, *d, p.coords)};
}

struct GridSpec {
    int radii = 8;
    int angles = 32;
    /// Tensor grids larger than this are thinned on factors beyond the second.
    std::size_t max_points = 65536;
};

struct AtlasTolerances {
    double holomorphy = 1e-8;
    double roundtrip = 1e-10;
    double cocycle = 1e-10;
    double step = 1e-4;
};

/// Radii and angles used to sample one radial factor. Lower radii of disks and
/// punctured annuli are cut at 1e-2 of the outer radius; punctured and full
/// planes are sampled on 1/4 < |c| < 4.
inline std::vector<Complex> factor_samples(const RadialConstraint& c, const GridSpec& g) {
    double r0 = 0.25;
    double r1 = 4.0;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Disk>) {
                r0 = 1e-2 * k.r;
                r1 = k.r;
            } else if constexpr (std::is_same_v<K, Annulus>) {
                r0 = k.r0 > 0.0 ? k.r0 : 1e-2 * k.r1;
                r1 = k.r1;
            }
        },
        c);
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(g.radii * g.angles));
    for (int i = 0; i < g.radii; ++i) {
        const double r = r0 * std::pow(r1 / r0, (i + 0.5) / g.radii);
        for (int j = 0; j < g.angles; ++j)
            out.push_back(std::polar(r, two_pi * (j + 0.5) / g.angles));
    }
    return out;
}

/// Deterministic sample grid: full tensor product on the first two factors,
/// cyclic strided indices on later factors.
inline std::vector<Coords> sample_grid(const PolyDomain& domain, const GridSpec& g) {
    std::vector<std::vector<Complex>> per;
    for (const auto& f : domain.factors())
        per.push_back(factor_samples(f, g));
    if (per.empty())
        return {};
    std::size_t total = per[0].size();
    if (per.size() > 1)
        total *= per[1].size();
    std::vector<Coords> out;
    out.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        Coords c(per.size());
        c[0] = per[0][i % per[0].size()];
        if (per.size() > 1)
            c[1] = per[1][i / per[0].size()];
        for (std::size_t k = 2; k < per.size(); ++k)
            c[k] = per[k][(i * (2 * k + 1) + k) % per[k].size()];
        out.push_back(std::move(c));
    }
    if (out.size() > g.max_points)
        out.resize(g.max_points);
    return out;
}

/// Random point of a radial factor: log-uniform radius inside the sampling
/// band of factor_samples, uniform angle.
template <class Rng>
Complex random_in(const RadialConstraint& c, Rng& rng) {
    double r0 = 0.25;
    double r1 = 4.0;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Disk>) {
                r0 = 1e-2 * k.r;
                r1 = k.r;
            } else if constexpr (std::is_same_v<K, Annulus>) {
                r0 = k.r0 > 0.0 ? k.r0 : 1e-2 * k.r1;
                r1 = k.r1;
            }
        },
        c);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    std::uniform_real_distribution<double> t(0.0, two_pi);
    return std::polar(r0 * std::pow(r1 / r0, u(rng)), t(rng));
}

template <class Rng>
Coords random_in(const PolyDomain& d, Rng& rng) {
    Coords c;
    for (const auto& f : d.factors())
        c.push_back(random_in(f, rng));
    return c;
}

inline double max_abs_diff(const Coords& a, const Coords& b) {
    if (a.size() != b.size())
        return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

struct TransitionCheck {
    std::string label;
    std::size_t points_tested = 0;
    std::size_t points_skipped = 0;
    double max_cr_residual = 0.0;
    double max_roundtrip = 0.0;
    bool passed = false;
};

struct CocycleCheck {
    std::string chain; // "X->Y->Z"
    std::size_t points_tested = 0;
    double max_mismatch = 0.0;
    bool passed = false;
};

struct AtlasReport {
    std::vector<TransitionCheck> transitions;
    std::vector<CocycleCheck> cocycles;

    bool passed() const {
        return std::all_of(transitions.begin(), transitions.end(), [](const auto& t) { return t.passed; }) &&
               std::all_of(cocycles.begin(), cocycles.end(), [](const auto& c) { return c.passed; });
    }
    double max_cr_residual() const {
        double m = 0.0;
        for (const auto& t : transitions)
            m = std::max(m, t.max_cr_residual);
        return m;
    }
    double max_roundtrip() const {
        double m = 0.0;
        for (const auto& t : transitions)
            m = std::max(m, t.max_roundtrip);
        return m;
    }
};

/// Certifies every transition direction on its overlap grid: holomorphy via
/// cr_residual, round trips back to the source chart, and agreement of
/// two-step chains with a direct transition where one is registered. Grid
/// points whose difference stencil leaves the overlap are skipped.
inline AtlasReport verify_atlas(const AtlasDescription& atlas, const GridSpec& grid = {},
                                const AtlasTolerances& tol = {}) {
    AtlasReport report;
    for (const auto& d : atlas.directed()) {
        TransitionCheck check;
        check.label = d.transition->name + " " + d.label();
        const Chart& source = atlas.chart(d.source());
        const Chart& target = atlas.chart(d.target());
        const auto back = atlas.find(d.target(), d.source());
        for (const Coords& p : sample_grid(d.domain(), grid)) {
            Coords image;
            try {
                image = detail::apply(atlas, d, p);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NotInOverlap)
                    throw;
                continue;
            }
            double cr = 0.0;
            try {
                const Coords ref = d.map()(p);
                cr = cr_residual([&](const Coords& q) { return target.aligned(d.map()(q), ref); }, p, tol.step);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::EvaluationOutsideDomain)
                    throw;
                ++check.points_skipped;
                continue;
            }
            double rt = std::numeric_limits<double>::infinity();
            try {
                const Coords returned = detail::apply(atlas, *back, image);
                rt = max_abs_diff(source.aligned(returned, p), p);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NotInOverlap)
                    throw;
            }
            ++check.points_tested;
            check.max_cr_residual = std::max(check.max_cr_residual, cr);
            check.max_roundtrip = std::max(check.max_roundtrip, rt);
        }
        check.passed = check.points_tested > 0 && check.max_cr_residual <= tol.holomorphy &&
                       check.max_roundtrip <= tol.roundtrip;
        report.transitions.push_back(std::move(check));
    }

    for (const auto& d1 : atlas.directed()) {
        for (const auto& d2 : atlas.directed()) {
            if (d2.source() != d1.target() || d2.target() == d1.source())
                continue;
            const auto direct = atlas.find(d1.source(), d2.target());
            if (!direct)
                continue;
            CocycleCheck check;
            check.chain = d1.source() + "->" + d1.target() + "->" + d2.target();
            const Chart& end = atlas.chart(d2.target());
            for (const Coords& p : sample_grid(d1.domain(), grid)) {
                try {
                    const Coords two_step = detail::apply(atlas, d2, detail::apply(atlas, d1, p));
                    const Coords one_step = detail::apply(atlas, *direct, p);
                    check.max_mismatch =
                        std::max(check.max_mismatch, max_abs_diff(end.aligned(two_step, one_step), one_step));
                    ++check.points_tested;
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::NotInOverlap)
                        throw;
                }
            }
            check.passed = check.max_mismatch <= tol.cocycle;
            report.cocycles.push_back(std::move(check));
        }
    }
    return report;
}

} // namespace holoatlas

#endif // HOLOATLAS_ATLAS_HPP
