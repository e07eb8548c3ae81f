#include <holoatlas/holo.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace holoatlas;

namespace {

const CirclePath unit({0.0, 0.0}, 1.0);

TEST(CirclePath, RejectsBadSampling) {
    EXPECT_THROW(CirclePath({0.0, 0.0}, 1.0, 100), Error);
    EXPECT_THROW(CirclePath({0.0, 0.0}, 1.0, 8), Error);
    EXPECT_THROW(CirclePath({0.0, 0.0}, 0.0), Error);
    EXPECT_NO_THROW(CirclePath({0.0, 0.0}, 1.0, 16));
}

TEST(Winding, Monomial) { EXPECT_EQ(winding_number([](Complex w) { return w * w * w; }, unit), 3); }

TEST(Winding, Constant) { EXPECT_EQ(winding_number([](Complex) { return Complex{5.0, 0.0}; }, unit), 0); }

TEST(Winding, NonvanishingFactorContributesNothing) {
    EXPECT_EQ(winding_number([](Complex w) { return std::exp(w) / (w * w); }, unit), -2);
}

TEST(Winding, OffCenterCircle) {
    // (w - 2) has its zero inside |w - 2| = 0.5, (w + 2) does not
    const CirclePath c({2.0, 0.0}, 0.5);
    EXPECT_EQ(winding_number([](Complex w) { return (w - 2.0) * (w + 2.0); }, c), 1);
}

TEST(Winding, ZeroOnPathIsNonVanishingError) {
    try {
        winding_number([](Complex w) { return w - 1.0; }, unit);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonVanishing);
    }
}

TEST(Winding, UnresolvedPhaseIsResolutionError) {
    const CirclePath coarse({0.0, 0.0}, 1.0, 16);
    try {
        winding_number([](Complex w) { return std::pow(w, 40); }, coarse);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Resolution);
    }
}

TEST(Winding, AdditiveUnderProducts) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> deg(-4, 4);
    for (int trial = 0; trial < 20; ++trial) {
        const int a = deg(rng);
        const int b = deg(rng);
        auto f = [a](Complex w) { return std::pow(w, a) * std::exp(0.3 * w); };
        auto g = [b](Complex w) { return std::pow(w, b) * (3.0 + w); };
        EXPECT_EQ(winding_number([&](Complex w) { return f(w) * g(w); }, unit),
                  winding_number(f, unit) + winding_number(g, unit));
    }
}

TEST(Laurent, Monomial) { EXPECT_NEAR(std::abs(laurent_coefficient([](Complex w) { return w * w; }, unit, 2) - 1.0), 0.0, 1e-12); }

TEST(Laurent, Residue) {
    EXPECT_NEAR(std::abs(laurent_coefficient([](Complex w) { return 1.0 / w; }, unit, -1) - 1.0), 0.0, 1e-12);
}

TEST(Laurent, TaylorOfExp) {
    EXPECT_NEAR(std::abs(laurent_coefficient([](Complex w) { return std::exp(w); }, unit, 3) - 1.0 / 6.0), 0.0, 1e-12);
}

TEST(Laurent, ReproducesRandomLaurentPolynomials) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const CirclePath c({0.0, 0.0}, 0.7);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Complex> a(11);
        for (auto& x : a)
            x = {u(rng), u(rng)};
        auto g = [&](Complex w) {
            Complex s = 0.0;
            for (int n = -5; n <= 5; ++n)
                s += a[static_cast<std::size_t>(n + 5)] * std::pow(w, n);
            return s;
        };
        for (int n = -5; n <= 5; ++n)
            EXPECT_LE(std::abs(laurent_coefficient(g, c, n) - a[static_cast<std::size_t>(n + 5)]), 1e-12);
    }
}

TEST(CauchyRiemann, HolomorphicMapIsSmall) {
    auto f = [](const Coords& p) { return Coords{p[0] * p[0], p[1]}; };
    EXPECT_LE(cr_residual(f, {1.0, 0.3}, 1e-4), 1e-8);
}

TEST(CauchyRiemann, ConjugateMapIsOne) {
    auto f = [](const Coords& p) { return Coords{std::conj(p[0]), p[1]}; };
    for (Complex z : {Complex{1.0, 0.0}, Complex{-0.3, 2.0}})
        EXPECT_NEAR(cr_residual(f, {z, 0.5}, 1e-4), 1.0, 1e-6);
}

TEST(CauchyRiemann, LinearMapIsExact) {
    const Complex a{1.5, -0.5};
    const Complex b{0.25, 2.0};
    auto f = [&](const Coords& p) { return Coords{a * p[0] + b * p[1], b * p[0] - p[1]}; };
    EXPECT_LE(cr_residual(f, {0.3, -1.2}, 1e-4), 1e-12);
}

TEST(CauchyRiemann, RichardsonBeatsCentralOnReciprocal) {
    auto f = [](const Coords& p) { return Coords{1.0 / p[0]}; };
    const Coords p{Complex{0.2, 0.05}};
    EXPECT_LE(cr_residual(f, p, 1e-4, Stencil::Richardson), 1e-8);
    EXPECT_LT(cr_residual(f, p, 1e-4, Stencil::Richardson), cr_residual(f, p, 1e-4, Stencil::Central));
}

TEST(CauchyRiemann, DomainFailureIsReported) {
    auto f = [](const Coords& p) {
        if (std::abs(p[0]) < 1.0)
            throw Error(ErrorKind::OutsideDomain, "inside the unit disk");
        return p;
    };
    try {
        cr_residual(f, {1.0}, 1e-4);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EvaluationOutsideDomain);
    }
}

std::vector<Complex> loop(int turns, int per_turn = 64, Complex center = 0.0) {
    std::vector<Complex> out;
    for (int k = 0; k <= turns * per_turn; ++k)
        out.push_back(center + std::polar(1.0, two_pi * k / per_turn));
    return out;
}

TEST(ContinueLog, OneLoop) {
    const auto r = continue_log(loop(1), LogBranch{0});
    EXPECT_EQ(r.branch.branch, 1);
    EXPECT_NEAR(std::abs(r.value - two_pi_i), 0.0, 1e-12);
}

TEST(ContinueLog, TwoLoops) {
    const auto r = continue_log(loop(2), LogBranch{0});
    EXPECT_EQ(r.branch.branch, 2);
    EXPECT_NEAR(std::abs(r.value - 2.0 * two_pi_i), 0.0, 1e-12);
}

TEST(ContinueLog, LoopAwayFromZeroKeepsBranch) {
    const auto r = continue_log(loop(1, 64, {3.0, 0.0}), LogBranch{-2});
    EXPECT_EQ(r.branch.branch, -2);
    EXPECT_NEAR(std::abs(r.value - LogBranch{-2}.log(4.0)), 0.0, 1e-12);
}

TEST(ContinueLog, ThroughZeroAndCoarseSteps) {
    const std::vector<Complex> through{1.0, 0.0, -1.0};
    const std::vector<Complex> coarse{1.0, -1.0};
    try {
        continue_log(through, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PathThroughZero);
    }
    try {
        continue_log(coarse, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::StepTooCoarse);
    }
}

TEST(ContinueLog, AgreesWithLogOfEndpoint) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Complex end{u(rng), u(rng)};
        std::vector<Complex> path;
        for (int k = 0; k <= 400; ++k)
            path.push_back(1.0 + (end - 1.0) * (k / 400.0) + Complex{0.0, 3.0} * std::sin(k * std::numbers::pi / 400));
        const auto r = continue_log(path, {});
        EXPECT_NEAR(std::abs(std::exp(r.value) - end), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(r.branch.log(end) - r.value), 0.0, 1e-12);
    }
}

} // namespace
