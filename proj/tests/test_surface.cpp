#include <holoatlas/surface.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace holoatlas;

namespace {

const Params defaults{};

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::InvalidProblem;
}

TEST(Params, Chain) {
    EXPECT_NO_THROW(defaults.validate());
    EXPECT_EQ(kind_of([] { Params{0.2, 0.5, 2.5}.validate(); }), ErrorKind::InvalidParams);
    EXPECT_EQ(kind_of([] { Params{0.5, 0.2, 1.6}.validate(); }), ErrorKind::InvalidParams);
    EXPECT_EQ(kind_of([] { Params{0.2, 0.5, 0.9}.validate(); }), ErrorKind::InvalidParams);
    EXPECT_EQ(kind_of([] { Params{0.2, 0.5, 1.6, 0.8}.validate(); }), ErrorKind::InvalidParams);
}

TEST(Phi, PrincipalValue) {
    // high-precision evaluation of the closed form
    EXPECT_NEAR(std::abs(phi(defaults, 0.25) - Complex{1.9766570641654864, -0.30467499189247609}), 0.0, 1e-13);
}

TEST(Phi, BranchShiftMultipliesByW) {
    const Complex r = phi(defaults, 0.4, LogBranch{1}) / phi(defaults, 0.4, LogBranch{0});
    EXPECT_NEAR(std::abs(r - 0.4), 0.0, 1e-12);
}

TEST(Phi, MonodromyAndNonvanishing) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const Complex w = random_in(Annulus{defaults.rho0, defaults.rho1}, rng);
        for (int b = -2; b <= 2; ++b) {
            const Complex v = phi(defaults, w, LogBranch{b});
            ASSERT_GT(std::abs(v), 0.0);
            EXPECT_LE(std::abs(phi(defaults, w, LogBranch{b + 1}) - w * v) / std::abs(w * v), 1e-12);
        }
    }
}

TEST(Phi, OutsideAnnulus) {
    EXPECT_EQ(kind_of([] { phi(defaults, 0.1); }), ErrorKind::OutsideAnnulus);
    EXPECT_EQ(kind_of([] { phi(defaults, 0.5); }), ErrorKind::OutsideAnnulus);
}

TEST(NormalizeA, Examples) {
    const auto a = normalize_a(4.0, 0.5);
    EXPECT_NEAR(std::abs(a.point.z - 1.0), 0.0, 1e-15);
    EXPECT_EQ(a.exponent, 2);
    const auto b = normalize_a(1.0, 0.3);
    EXPECT_EQ(b.point.z, Complex{1.0});
    EXPECT_EQ(b.exponent, 0);
}

TEST(NormalizeA, LandsInFundamentalDomain) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> lr(-30.0, 30.0);
    std::uniform_real_distribution<double> t(0.0, two_pi);
    for (int i = 0; i < 500; ++i) {
        const Complex w = std::polar(std::exp(-std::exp(lr(rng) / 10.0)), t(rng));
        const Complex z = std::polar(std::exp(lr(rng)), t(rng));
        const auto n = normalize_a(z, w);
        EXPECT_TRUE(is_canonical_a(n.point.z, w));
        EXPECT_LE(std::abs(n.point.z - z * ipow(w, n.exponent)), 1e-12 * std::abs(n.point.z));
    }
}

TEST(NormalizeA, Errors) {
    EXPECT_EQ(kind_of([] { normalize_a(0.0, 0.3); }), ErrorKind::OutsideDomain);
    EXPECT_EQ(kind_of([] { normalize_a(1.0, 0.0); }), ErrorKind::OutsideDomain);
}

TEST(BigPhi, Example) {
    const PointA p = big_phi(defaults, 1.2, 0.25);
    EXPECT_NEAR(std::abs(p.z - Complex{0.59299711924964588, -0.091402497567742823}), 0.0, 1e-12);
    EXPECT_EQ(p.w, Complex{0.25});
    const PointA q = big_phi(defaults, 1.2, 0.25, LogBranch{1});
    EXPECT_NEAR(std::abs(q.z - p.z), 0.0, 1e-12);
}

TEST(BigPhi, BranchIndependence) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 100; ++i) {
        const Complex z = random_in(Annulus{1.0, defaults.rho2}, rng);
        const Complex w = random_in(Annulus{defaults.rho0, defaults.rho1}, rng);
        const PointA ref = big_phi(defaults, z, w);
        for (int b = -3; b <= 3; ++b) {
            const PointA q = big_phi(defaults, z, w, LogBranch{b});
            EXPECT_LE(std::abs(align_a(q.z, q.w, ref.z) - ref.z), 1e-12);
        }
    }
}

TEST(BranchUniqueness, ExactlyOneAdmissibleBranch) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        const PointA p = random_overlap_point(defaults, rng);
        EXPECT_EQ(admissible_branches(defaults, p.z, p.w, 5).size(), 1u);
    }
}

TEST(Transit, AToBRoundTrip) {
    const PointB b = transit_a_to_b(defaults, {Complex{0.59299711924964588, -0.091402497567742823}, 0.25});
    EXPECT_NEAR(std::abs(b.z - 1.2), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(b.s - 4.0), 0.0, 1e-10);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
        const PointA p = random_overlap_point(defaults, rng);
        const PointA back = transit_b_to_a(defaults, transit_a_to_b(defaults, p));
        EXPECT_LE(std::abs(back.z - p.z), 1e-10);
        EXPECT_LE(std::abs(back.w - p.w), 1e-15);
    }
}

TEST(Transit, NotInV1) {
    EXPECT_EQ(kind_of([] { transit_a_to_b(defaults, {1.0, 0.6}); }), ErrorKind::NotInV1);
    EXPECT_EQ(kind_of([] { transit_a_to_b(defaults, {1.0, 0.5}); }), ErrorKind::NotInV1);
}

TEST(Transit, NodeRoundTrip) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        const PointN n{random_in(Annulus{0.0, 0.3}, rng), random_in(Annulus{0.0, 0.3}, rng)};
        const PointN back = transit_a_to_n(defaults, transit_n_to_a(defaults, n));
        EXPECT_LE(std::abs(back.x - n.x), 1e-12);
        EXPECT_LE(std::abs(back.y - n.y), 1e-12);
    }
    EXPECT_EQ(kind_of([] { transit_n_to_a(defaults, {0.1, 0.0}); }), ErrorKind::NotInOverlap);
}

TEST(Fibration, Projection) {
    const BasePoint a = fibration_f(PointA{1.0, 0.3});
    EXPECT_EQ(a.chart, 1);
    EXPECT_EQ(a.value, Complex{0.3});
    const BasePoint n = fibration_f(PointN{0.1, 0.2});
    EXPECT_EQ(n.chart, 1);
    EXPECT_NEAR(std::abs(n.value - 0.02), 0.0, 1e-17);
    const BasePoint b = fibration_f(PointB{1.2, 3.0});
    EXPECT_EQ(b.chart, 2);
    EXPECT_EQ(b.value, Complex{3.0});
}

TEST(Fibration, CommutesWithTransitions) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const PointA p = random_overlap_point(defaults, rng);
        const BasePoint fa = fibration_f(p);
        const BasePoint fb = fibration_f(transit_a_to_b(defaults, p));
        EXPECT_LE(std::abs(fa.other().value - fb.value), 1e-12);
    }
}

TEST(FiberClass, Examples) {
    const auto e = fiber_class(defaults, {1, 0.3});
    ASSERT_TRUE(std::holds_alternative<EllipticFiber>(e));
    EXPECT_EQ(std::get<EllipticFiber>(e).q, Complex{0.3});
    EXPECT_TRUE(std::holds_alternative<NodalFiber>(fiber_class(defaults, {1, 0.0})));
    const auto a = fiber_class(defaults, {2, 0.5});
    ASSERT_TRUE(std::holds_alternative<AnnulusFiber>(a));
    EXPECT_EQ(std::get<AnnulusFiber>(a).s, Complex{0.5});
    EXPECT_TRUE(std::holds_alternative<EllipticFiber>(fiber_class(defaults, {2, 4.0})));
    EXPECT_TRUE(std::holds_alternative<AnnulusFiber>(fiber_class(defaults, {1, 0.8})));
}

// Independent oracle: j = 1728 E4^3 / (E4^3 - E6^2), E6 = 1 - 504 sum sigma_5(n) q^n.
Complex j_from_e4_e6(Complex q, int terms = 200) {
    Complex e4 = 1.0;
    Complex e6 = 1.0;
    Complex qn = 1.0;
    for (int n = 1; n <= terms; ++n) {
        qn *= q;
        double s3 = 0.0;
        double s5 = 0.0;
        for (int d = 1; d <= n; ++d) {
            if (n % d == 0) {
                s3 += std::pow(d, 3);
                s5 += std::pow(d, 5);
            }
        }
        e4 += 240.0 * s3 * qn;
        e6 -= 504.0 * s5 * qn;
    }
    const Complex c = e4 * e4 * e4;
    return 1728.0 * c / (c - e6 * e6);
}

TEST(JInvariant, SquareLattice) {
    const Complex j = j_invariant(std::exp(-two_pi));
    EXPECT_LE(std::abs(j - 1728.0) / 1728.0, 1e-6);
    EXPECT_LE(std::abs(j_from_e4_e6(std::exp(-two_pi)) - 1728.0) / 1728.0, 1e-10);
}

TEST(JInvariant, LeadingTerm) {
    const Complex q = 1e-6;
    EXPECT_LT(std::abs(q * j_invariant(q) - 1.0), 1e-3);
}

TEST(JInvariant, AgreesWithE6Oracle) {
    // E4^3 - E6^2 cancels to about 1728 / |j|, so the oracle is only used for small |q|
    for (Complex q : {Complex{0.1}, Complex{0.05}, Complex{0.08, 0.06}, Complex{-0.02, 0.1}})
        EXPECT_LE(std::abs(j_invariant(q) - j_from_e4_e6(q)) / std::abs(j_from_e4_e6(q)), 1e-9) << q;
}

TEST(JInvariant, FrozenValues) {
    // high-precision values of 1728 * klein j at tau = log(q) / (2 pi i)
    EXPECT_NEAR(j_invariant(0.1).real() / 27932056.242991228, 1.0, 1e-10);
    EXPECT_NEAR(j_invariant(0.3).real() / 1.7400828832847839e14, 1.0, 1e-10);
    const Complex c = j_invariant({0.2, 0.15});
    EXPECT_LE(std::abs(c - Complex{-1791553316.3701958, -14862660189.434027}) / std::abs(c), 1e-10);
}

TEST(JInvariant, IncreasingAlongRealSweep) {
    // j(q) on (e^{-2 pi}, 1) grows from its minimum 1728 at the square lattice
    double previous = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double w = 0.05 + 0.4 * i / 49.0;
        const double j = std::abs(fiber_modulus(defaults, w));
        EXPECT_GT(j, previous + 1.0);
        previous = j;
    }
}

TEST(JInvariant, Errors) {
    EXPECT_EQ(kind_of([] { j_invariant(0.0); }), ErrorKind::OutsideDomain);
    EXPECT_EQ(kind_of([] { j_invariant(0.9); }), ErrorKind::TruncationInsufficient);
    EXPECT_EQ(kind_of([] { fiber_modulus(defaults, 0.6); }), ErrorKind::SweepOutsideDomain);
}

TEST(Sigma, ChartValues) {
    EXPECT_NEAR(std::abs(sigma_eval(PointA{2.0, 0.3}).coefficient - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(sigma_eval(PointB{1.2, 3.0}).coefficient.real(), -1.0 / 10.8, 1e-15);
    EXPECT_NEAR(sigma_eval(PointB{1.2, 3.0}).coefficient.real(), -0.0925926, 1e-7);
    EXPECT_EQ(sigma_eval(PointN{0.1, 0.05}).coefficient, Complex{1.0});
    EXPECT_EQ(kind_of([] { sigma_eval(PointB{1.2, 0.0}); }), ErrorKind::OnPolarSet);
}

TEST(Sigma, TransitionCoherence) {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i)
        EXPECT_LE(sigma_transition_check(defaults, random_overlap_point(defaults, rng)), 1e-8);
}

TEST(Sigma, NodeCoherence) {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 100; ++i) {
        const PointN p{random_in(Annulus{0.0, 0.3}, rng), random_in(Annulus{0.0, 0.3}, rng)};
        EXPECT_LE(sigma_node_check(defaults, p), 1e-10);
    }
}

TEST(Sigma, CheckConvergesAtSecondOrder) {
    const PointA p = big_phi(defaults, {1.3, 0.2}, {0.22, 0.1});
    const double coarse = sigma_transition_check(defaults, p, 2e-4);
    const double fine = sigma_transition_check(defaults, p, 1e-4);
    EXPECT_GT(coarse / fine, 3.5);
    EXPECT_LT(coarse / fine, 4.5);
}

TEST(Sigma, CorruptedChartAFails) {
    std::mt19937_64 rng(15);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i)
        worst = std::max(worst, sigma_transition_check(defaults, random_overlap_point(defaults, rng), sigma_check_step,
                                                       SigmaFault::ChartASquared));
    EXPECT_GE(worst, 0.1);
}

TEST(Sigma, PolarOrder) {
    for (Complex z0 : {Complex{1.2}, Complex{1.5}, std::polar(1.3, 2.0)})
        for (double r : {0.1, 0.5, 0.9}) {
            EXPECT_EQ(sigma_polar_order(defaults, z0, r), -2);
            EXPECT_LT(std::abs(sigma_polar_order_real(defaults, z0, r) + 2.0), 1e-9);
        }
    EXPECT_EQ(sigma_polar_order(defaults, 1.2, 0.5, SigmaFault::ChartBSimplePole), -1);
    EXPECT_EQ(kind_of([] { sigma_polar_order(defaults, 0.9, 0.5); }), ErrorKind::OutsideDomain);
}

TEST(MeromorphicPullback, Examples) {
    const auto id = meromorphic_pullback({{0.0, 1.0}, {1.0}});
    EXPECT_EQ(id(PointA{1.0, 0.3}).value, Complex{0.3});
    const auto r = meromorphic_pullback({{1.0, 0.0, 1.0}, {0.0, 1.0}});
    EXPECT_NEAR(std::abs(r.at_base({1, 0.25}).value - 4.25), 0.0, 1e-14);
    EXPECT_TRUE(r.at_base({1, 0.0}).pole);
    EXPECT_TRUE(r.at_base({2, 0.0}).pole);
    const auto inv = meromorphic_pullback({{1.0}, {0.0, 1.0}});
    EXPECT_FALSE(inv.at_base({2, 0.0}).pole);
    EXPECT_EQ(inv.at_base({2, 0.0}).value, Complex{0.0});
}

TEST(MeromorphicPullback, ChartConsistency) {
    const auto r = meromorphic_pullback({{1.0, Complex{0.0, 2.0}, -3.0}, {0.5, 0.0, 0.0, 1.0}});
    std::mt19937_64 rng(16);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const PointA p = random_overlap_point(defaults, rng);
        const Complex a = r(p).value;
        const Complex b = r(transit_a_to_b(defaults, p)).value;
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(MeromorphicPullback, Indeterminate) {
    const auto r = meromorphic_pullback({{0.0, 1.0}, {0.0, 1.0}});
    EXPECT_EQ(kind_of([&] { r.at_base({1, 0.0}); }), ErrorKind::IndeterminateAtPoint);
    EXPECT_EQ(kind_of([] { meromorphic_pullback({{1.0}, {0.0}}); }), ErrorKind::InvalidProblem);
}

} // namespace
