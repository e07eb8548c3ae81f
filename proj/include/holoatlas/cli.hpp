#ifndef HOLOATLAS_CLI_HPP
#define HOLOATLAS_CLI_HPP

// Configuration, the verification suite and the data-emitting commands
// behind the holoatlas executable.

#include <holoatlas/atlas.hpp>
#include <holoatlas/atlas_json.hpp>
#include <holoatlas/bundles.hpp>
#include <holoatlas/error.hpp>
#include <holoatlas/holo.hpp>
#include <holoatlas/surface.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace holoatlas::cli {

enum ExitCode : int {
    exit_pass = 0,
    exit_verification_failure = 1,
    exit_input_error = 2,
};

struct Config {
    Params params;
    double holomorphy_tol = 1e-8;
    double roundtrip_tol = 1e-10;
    double rank_tol = 1e-9;
    int truncation = 32;
    int samples = 256;
    std::uint64_t seed = 42;
    /// Test hook: corrupt sigma so that the canonical-form checks must fail.
    SigmaFault sigma_fault = SigmaFault::None;

    void validate() const {
        try {
            params.validate();
        } catch (const Error& e) {
            throw Error(ErrorKind::InvalidConfig, e.what());
        }
        if (!(holomorphy_tol > 0.0 && roundtrip_tol > 0.0 && rank_tol > 0.0 && rank_tol < 1.0))
            throw Error(ErrorKind::InvalidConfig, "tolerances must be positive and rank_tol < 1");
        if (truncation < 8)
            throw Error(ErrorKind::InvalidConfig, "truncation must be at least 8");
        if (samples < 4 * (truncation + 1) || samples < 16 || (samples & (samples - 1)) != 0)
            throw Error(ErrorKind::InvalidConfig, "samples must be a power of two >= 4 (truncation + 1)");
    }

    SectionSpaceProblem problem(Cocycle c) const {
        return {std::move(c), truncation, default_radius(params), samples, rank_tol};
    }
};

inline std::string to_string(SigmaFault f) {
    switch (f) {
    case SigmaFault::None: return "none";
    case SigmaFault::ChartASquared: return "chart_a_squared";
    case SigmaFault::ChartBSimplePole: return "chart_b_simple_pole";
    }
    return "none";
}

inline SigmaFault parse_sigma_fault(const std::string& s) {
    if (s == "none")
        return SigmaFault::None;
    if (s == "chart_a_squared")
        return SigmaFault::ChartASquared;
    if (s == "chart_b_simple_pole")
        return SigmaFault::ChartBSimplePole;
    throw Error(ErrorKind::InvalidConfig, "unknown sigma fault '" + s + "'");
}

/// Reads a config document over `base`. Unknown keys are rejected.
inline Config config_from_json(const nlohmann::json& doc, Config base = {}) {
    if (!doc.is_object())
        throw Error(ErrorKind::ParseError, "config must be a JSON object");
    auto number = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_number())
            throw Error(ErrorKind::ParseError, key + " must be a number");
        return v.get<double>();
    };
    auto integer = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_number_integer())
            throw Error(ErrorKind::ParseError, key + " must be an integer");
        return v.get<std::int64_t>();
    };
    for (const auto& [key, value] : doc.items()) {
        if (key == "params") {
            if (!value.is_object())
                throw Error(ErrorKind::ParseError, "params must be an object");
            for (const auto& [k, v] : value.items()) {
                if (k == "rho0")
                    base.params.rho0 = number(v, k);
                else if (k == "rho1")
                    base.params.rho1 = number(v, k);
                else if (k == "rho2")
                    base.params.rho2 = number(v, k);
                else if (k == "node_radius")
                    base.params.node_radius = number(v, k);
                else
                    throw Error(ErrorKind::ParseError, "unknown params key '" + k + "'");
            }
        } else if (key == "tolerances") {
            if (!value.is_object())
                throw Error(ErrorKind::ParseError, "tolerances must be an object");
            for (const auto& [k, v] : value.items()) {
                if (k == "holomorphy")
                    base.holomorphy_tol = number(v, k);
                else if (k == "roundtrip")
                    base.roundtrip_tol = number(v, k);
                else if (k == "rank_tol")
                    base.rank_tol = number(v, k);
                else
                    throw Error(ErrorKind::ParseError, "unknown tolerances key '" + k + "'");
            }
        } else if (key == "truncation") {
            base.truncation = static_cast<int>(integer(value, key));
        } else if (key == "samples") {
            base.samples = static_cast<int>(integer(value, key));
        } else if (key == "seed") {
            base.seed = static_cast<std::uint64_t>(integer(value, key));
        } else if (key == "inject_sigma_fault") {
            if (!value.is_string())
                throw Error(ErrorKind::ParseError, "inject_sigma_fault must be a string");
            base.sigma_fault = parse_sigma_fault(value.get<std::string>());
        } else {
            throw Error(ErrorKind::ParseError, "unknown config key '" + key + "'");
        }
    }
    return base;
}

inline nlohmann::ordered_json to_json(const Config& c) {
    return {{"params", {{"rho0", c.params.rho0}, {"rho1", c.params.rho1}, {"rho2", c.params.rho2},
                        {"node_radius", c.params.node_radius}}},
            {"tolerances", {{"holomorphy", c.holomorphy_tol}, {"roundtrip", c.roundtrip_tol}, {"rank_tol", c.rank_tol}}},
            {"truncation", c.truncation},
            {"samples", c.samples},
            {"seed", c.seed},
            {"inject_sigma_fault", to_string(c.sigma_fault)}};
}

// ---------------------------------------------------------------------------
// verify

/// Shortest form with 17 significant digits, '.' decimal point regardless of locale.
inline std::string format_double(double x) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

struct Check {
    std::string name;
    std::string comparison; ///< "<=" or "=="
    double value;
    double threshold;
    std::string anchor; ///< the property of the construction this certifies
    std::string detail;

    bool passed() const { return comparison == "==" ? value == threshold : value <= threshold; }
};

struct VerificationReport {
    std::uint64_t seed = 0;
    std::vector<Check> checks;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
    }

    const Check* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name)
                return &c;
        return nullptr;
    }
};

namespace detail {

inline void add(VerificationReport& r, std::string name, std::string cmp, double value, double threshold,
                std::string anchor, std::string detail = {}) {
    r.checks.push_back({std::move(name), std::move(cmp), value, threshold, std::move(anchor), std::move(detail)});
}

// Runs a check body; a library error becomes a failing entry.
template <class Fn>
void guarded(VerificationReport& r, const std::string& name, const std::string& anchor, Fn&& body) {
    try {
        body();
    } catch (const Error& e) {
        add(r, name, "<=", std::numeric_limits<double>::infinity(), 0.0, anchor, e.what());
    }
}

} // namespace detail

inline constexpr int monodromy_samples = 200;
inline constexpr int sigma_samples = 100;
inline constexpr int splitting_cases = 20;
inline constexpr int square_samples = 100;

/// The full certification suite. Pure function of the config.
inline VerificationReport cmd_verify(const Config& config) {
    config.validate();
    const Params& p = config.params;
    VerificationReport r;
    r.seed = config.seed;
    std::mt19937_64 rng(config.seed);

    detail::guarded(r, "atlas_holomorphy", "gluing and node transitions are holomorphic", [&] {
        const AtlasTolerances tol{config.holomorphy_tol, config.roundtrip_tol, config.roundtrip_tol, 1e-4};
        const auto report = verify_atlas(make_surface_atlas(p), GridSpec{}, tol);
        std::size_t points = 0;
        for (const auto& t : report.transitions)
            points += t.points_tested;
        detail::add(r, "atlas_holomorphy", "<=", report.max_cr_residual(), config.holomorphy_tol,
                    "gluing and node transitions are holomorphic", std::to_string(points) + " grid points");
        detail::add(r, "atlas_roundtrip", "<=", report.max_roundtrip(), config.roundtrip_tol,
                    "gluing and node transitions are mutually inverse");
    });

    detail::guarded(r, "phi_monodromy", "continuing log w once around 0 multiplies phi by w", [&] {
        double worst = 0.0;
        for (int i = 0; i < monodromy_samples; ++i) {
            const Complex w = random_in(Annulus{p.rho0, p.rho1}, rng);
            for (int b = -3; b <= 3; ++b) {
                const Complex lower = w * phi(p, w, LogBranch{b});
                worst = std::max(worst, std::abs(phi(p, w, LogBranch{b + 1}) - lower) / std::abs(lower));
            }
        }
        detail::add(r, "phi_monodromy", "<=", worst, 1e-12, "continuing log w once around 0 multiplies phi by w");
    });

    detail::guarded(r, "big_phi_branch_independence", "the gluing embedding is single-valued on the quotient", [&] {
        const Chart a = surface_chart_a(p);
        double worst = 0.0;
        for (int i = 0; i < monodromy_samples; ++i) {
            const Complex z = random_in(Annulus{1.0, p.rho2}, rng);
            const Complex w = random_in(Annulus{p.rho0, p.rho1}, rng);
            const PointA ref = big_phi(p, z, w);
            for (int b = -3; b <= 3; ++b) {
                const PointA q = big_phi(p, z, w, LogBranch{b});
                worst = std::max(worst, std::abs(align_a(q.z, q.w, ref.z) - ref.z));
            }
        }
        detail::add(r, "big_phi_branch_independence", "<=", worst, 1e-12,
                    "the gluing embedding is single-valued on the quotient");
    });

    detail::guarded(r, "sigma_transition", "dz^dw/z descends and transforms by the gluing Jacobian", [&] {
        double worst = 0.0;
        for (int i = 0; i < sigma_samples; ++i)
            worst = std::max(worst, sigma_transition_check(p, random_overlap_point(p, rng), sigma_check_step,
                                                           config.sigma_fault));
        detail::add(r, "sigma_transition", "<=", worst, config.holomorphy_tol,
                    "dz^dw/z descends and transforms by the gluing Jacobian");
    });

    detail::guarded(r, "sigma_node_extension", "sigma extends across the node as dx^dy", [&] {
        double worst = 0.0;
        const double eps = p.node_radius;
        for (int i = 0; i < sigma_samples; ++i) {
            const PointN q{random_in(Annulus{0.0, eps}, rng), random_in(Annulus{0.0, eps}, rng)};
            worst = std::max(worst, sigma_node_check(p, q, sigma_check_step, config.sigma_fault));
        }
        detail::add(r, "sigma_node_extension", "<=", worst, 1e-10, "sigma extends across the node as dx^dy");
    });

    detail::guarded(r, "sigma_polar_order", "sigma has a double pole along the annulus fiber s = 0", [&] {
        double deviation = 0.0;
        int mismatches = 0;
        for (double z0 : {1.0 + (p.rho2 - 1.0) / 3.0, 1.0 + 5.0 * (p.rho2 - 1.0) / 6.0}) {
            for (double radius : {0.1, 0.5, 0.9}) {
                const double raw = sigma_polar_order_real(p, z0, radius, config.sigma_fault);
                deviation = std::max(deviation, std::abs(raw - std::round(raw)));
                if (round_winding(raw) != -2)
                    ++mismatches;
            }
        }
        detail::add(r, "sigma_polar_order", "==", mismatches, 0.0,
                    "sigma has a double pole along the annulus fiber s = 0",
                    "max distance from an integer " + format_double(deviation));
    });

    detail::guarded(r, "canonical_bundle", "the canonical bundle is the pullback of O(-2)", [&] {
        detail::add(r, "canonical_bundle", "==", canonical_divisor_check(p, config.sigma_fault), -2.0,
                    "the canonical bundle is the pullback of O(-2)");
    });

    const double radius = default_radius(p);
    detail::guarded(r, "chern_sweep", "O(k) has first Chern number k", [&] {
        int bad = 0;
        for (int k = -6; k <= 6; ++k)
            bad += chern_number(o_k_cocycle(k), radius) != k;
        detail::add(r, "chern_sweep", "==", bad, 0.0, "O(k) has first Chern number k", "k in [-6, 6]");
    });

    detail::guarded(r, "h0_sweep", "O(k) has max(0, k+1) independent sections", [&] {
        int bad = 0;
        for (int k = -4; k <= 6; ++k)
            bad += section_space_dim(config.problem(o_k_cocycle(k))) != std::max(0, k + 1);
        detail::add(r, "h0_sweep", "==", bad, 0.0, "O(k) has max(0, k+1) independent sections", "k in [-4, 6]");
    });

    detail::guarded(r, "triviality_sweep", "O(k) is trivial iff k = 0", [&] {
        int bad = 0;
        for (int k = -6; k <= 6; ++k)
            bad += triviality_check(config.problem(o_k_cocycle(k))) != (k == 0);
        detail::add(r, "triviality_sweep", "==", bad, 0.0, "O(k) is trivial iff k = 0", "k in [-6, 6]");
    });

    detail::guarded(r, "splitting_roundtrip", "bundles on CP^1 are classified by their splitting type", [&] {
        int bad = 0;
        std::uniform_int_distribution<int> rank(1, 4);
        std::uniform_int_distribution<int> degree(-3, 3);
        for (int c = 0; c < splitting_cases; ++c) {
            std::vector<int> k(static_cast<std::size_t>(rank(rng)));
            for (int& x : k)
                x = degree(rng);
            const CMatrix frame = random_frame(static_cast<int>(k.size()), rng);
            const auto result = splitting_type(config.problem(conjugated(diagonal_cocycle(k), frame)));
            std::sort(k.begin(), k.end());
            bad += result.type != k;
        }
        const LaurentMatrix euler{2, {{{-1, 1.0}}, {{0, 1.0}}, {}, {{1, 1.0}}}};
        bad += splitting_type(config.problem(euler.to_cocycle())).type != std::vector<int>{0, 0};
        detail::add(r, "splitting_roundtrip", "==", bad, 0.0, "bundles on CP^1 are classified by their splitting type",
                    std::to_string(splitting_cases) + " conjugated diagonal cases plus the Euler cocycle");
    });

    detail::guarded(r, "pullback_atlas", "total spaces of pulled-back bundles are complex manifolds", [&] {
        const auto q = pullback_to_e(std::vector<int>{-1, 3}, p);
        const AtlasTolerances tol{config.holomorphy_tol, config.roundtrip_tol, config.roundtrip_tol, 1e-4};
        const auto report = verify_atlas(q.atlas, GridSpec{}, tol);
        detail::add(r, "pullback_atlas", "==", report.passed() ? 0.0 : 1.0, 0.0,
                    "total spaces of pulled-back bundles are complex manifolds",
                    "k = (-1, 3), max cr " + format_double(report.max_cr_residual()));
        const auto square = commuting_square_check(q, square_samples, rng);
        detail::add(r, "pullback_square", "<=", std::max(square.max_projection_gap, square.max_transition_gap), 1e-10,
                    "the fiber-product square over CP^1 commutes");
    });

    detail::guarded(r, "fiber_modulus_square_lattice", "the fiber over w = exp(-2 pi) has j = 1728", [&] {
        const Complex j = j_invariant(std::exp(-two_pi));
        detail::add(r, "fiber_modulus_square_lattice", "<=", std::abs(j - 1728.0) / 1728.0, 1e-6,
                    "the fiber over w = exp(-2 pi) has j = 1728");
    });

    return r;
}

inline nlohmann::ordered_json to_json(const VerificationReport& r, const Config& config) {
    nlohmann::ordered_json out;
    out["status"] = r.passed() ? "pass" : "fail";
    out["seed"] = r.seed;
    out["config"] = to_json(config);
    out["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
        nlohmann::ordered_json j{{"name", c.name}, {"status", c.passed() ? "pass" : "fail"}, {"comparison", c.comparison}};
        // JSON has no infinity; failed evaluations report null
        j["value"] = std::isfinite(c.value) ? nlohmann::ordered_json(c.value) : nlohmann::ordered_json();
        j["threshold"] = c.threshold;
        j["anchor"] = c.anchor;
        if (!c.detail.empty())
            j["detail"] = c.detail;
        out["checks"].push_back(std::move(j));
    }
    return out;
}

// ---------------------------------------------------------------------------
// fiber-moduli

struct Sweep {
    enum class Kind { Radial, Circular } kind = Kind::Radial;
    double from = 0.05;  ///< radial: first |w|
    double to = 0.45;    ///< radial: last |w|
    double angle = 0.0;  ///< radial: arg w
    double radius = 0.3; ///< circular: |w|
    int count = 50;
};

using FiberRow = std::array<double, 4>; // w_re, w_im, j_re, j_im

inline std::vector<FiberRow> cmd_fiber_moduli(const Config& config, const Sweep& sweep) {
    config.validate();
    if (sweep.count < 0)
        throw Error(ErrorKind::SweepOutsideDomain, "negative point count");
    std::vector<FiberRow> rows;
    for (int i = 0; i < sweep.count; ++i) {
        Complex w;
        if (sweep.kind == Sweep::Kind::Radial) {
            const double t = sweep.count == 1 ? 0.0 : static_cast<double>(i) / (sweep.count - 1);
            w = std::polar(sweep.from + t * (sweep.to - sweep.from), sweep.angle);
        } else {
            w = std::polar(sweep.radius, two_pi * i / sweep.count);
        }
        const Complex j = fiber_modulus(config.params, w);
        rows.push_back({w.real(), w.imag(), j.real(), j.imag()});
    }
    return rows;
}

inline std::string to_csv(const std::vector<FiberRow>& rows) {
    std::string out = "w_re,w_im,j_re,j_im\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += format_double(row[i]);
            out += i + 1 < row.size() ? ',' : '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// sections

/// Cocycle document: {"rank": n, "entries": n x n nested arrays, each entry a
/// list of [exponent, re, im] Laurent terms}.
inline LaurentMatrix parse_cocycle(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("rank") || !doc.contains("entries"))
        throw Error(ErrorKind::ParseError, "cocycle needs 'rank' and 'entries'");
    if (!doc["rank"].is_number_integer() || doc["rank"].get<int>() < 1)
        throw Error(ErrorKind::ParseError, "rank must be a positive integer");
    const int n = doc["rank"].get<int>();
    const auto& rows = doc["entries"];
    if (!rows.is_array() || static_cast<int>(rows.size()) != n)
        throw Error(ErrorKind::ParseError, "entries must have rank rows");
    LaurentMatrix m{n, {}};
    for (const auto& row : rows) {
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw Error(ErrorKind::ParseError, "each entries row must have rank columns");
        for (const auto& entry : row) {
            if (!entry.is_array())
                throw Error(ErrorKind::ParseError, "an entry must be a list of terms");
            LaurentPoly poly;
            for (const auto& term : entry) {
                if (!term.is_array() || term.size() != 3 || !term[0].is_number_integer() || !term[1].is_number() ||
                    !term[2].is_number())
                    throw Error(ErrorKind::ParseError, "a term must be [exponent, re, im]");
                poly.emplace_back(term[0].get<int>(), Complex{term[1].get<double>(), term[2].get<double>()});
            }
            m.entries.push_back(std::move(poly));
        }
    }
    return m;
}

inline nlohmann::ordered_json cmd_sections(const Config& config, const nlohmann::json& cocycle_doc) {
    config.validate();
    const LaurentMatrix m = parse_cocycle(cocycle_doc);
    const Cocycle c = m.to_cocycle();
    const SectionSpaceProblem problem = config.problem(c);
    // det G must not vanish on the sample circle
    try {
        CirclePath path({0.0, 0.0}, problem.radius, problem.samples);
        winding_number_real([&](Complex w) { return c(w).determinant(); }, path);
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, std::string("cocycle is not invertible on the overlap: ") + e.what());
    }
    nlohmann::ordered_json out;
    out["rank"] = m.rank;
    out["chern"] = chern_number(c, problem.radius, problem.samples);
    out["h0"] = section_space_dim(problem);
    const auto split = splitting_type(problem);
    out["splitting_type"] = split.type;
    out["h_profile"] = nlohmann::ordered_json::array();
    for (const auto& [twist, h] : split.profile)
        out["h_profile"].push_back({{"m", twist}, {"h0", h}});
    return out;
}

// ---------------------------------------------------------------------------
// atlas-export

inline nlohmann::ordered_json cmd_atlas_export(const Config& config) {
    config.validate();
    const auto& p = config.params;
    nlohmann::ordered_json out;
    out["params"] = {{"rho0", p.rho0}, {"rho1", p.rho1}, {"rho2", p.rho2}, {"node_radius", p.node_radius}};
    const auto atlas = to_json(make_surface_atlas(p));
    out["charts"] = atlas["charts"];
    out["transitions"] = atlas["transitions"];
    return out;
}

} // namespace holoatlas::cli

#endif // HOLOATLAS_CLI_HPP
