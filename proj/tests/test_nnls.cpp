#include <gtest/gtest.h>

#include <random>

#include "censcorr/nnls.hpp"
#include "oracles.hpp"

using namespace censcorr;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

NnlsProblem random_problem(std::mt19937_64& rng, Index m, Index n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    NnlsProblem p;
    p.a = MatrixXd::NullaryExpr(m, n, [&] { return u(rng); });
    p.b = VectorXd::NullaryExpr(n, [&] { return u(rng); });
    return p;
}

}  // namespace

TEST(Nnls, OrthonormalDesignClipsAtZero) {
    NnlsProblem p{MatrixXd::Identity(2, 2), VectorXd(2)};
    p.b << 3.0, -1.0;
    const auto s = solve_nnls(p);
    EXPECT_DOUBLE_EQ(s.x[0], 3.0);
    EXPECT_DOUBLE_EQ(s.x[1], 0.0);
    EXPECT_NEAR(s.residual_norm, 1.0, 1e-15);
}

TEST(Nnls, FeasibleUnconstrainedOptimum) {
    NnlsProblem p{MatrixXd::Identity(3, 3), VectorXd(3)};
    p.b << 0.2, 0.5, 0.9;
    const auto s = solve_nnls(p);
    EXPECT_EQ(s.x, p.b);
}

TEST(Nnls, KktViolationHandValues) {
    NnlsProblem p{MatrixXd::Identity(2, 2), VectorXd(2)};
    p.b << 3.0, -1.0;
    EXPECT_DOUBLE_EQ(kkt_violation(p, VectorXd::Zero(2)), 3.0);
    NnlsProblem zero{MatrixXd::Identity(2, 2), VectorXd::Zero(2)};
    EXPECT_EQ(kkt_violation(zero, VectorXd::Zero(2)), 0.0);
}

TEST(Nnls, KktViolationRejectsBadInput) {
    NnlsProblem p{MatrixXd::Identity(2, 2), VectorXd::Ones(2)};
    EXPECT_THROW(kkt_violation(p, VectorXd::Zero(3)), DimensionMismatch);
    EXPECT_THROW(kkt_violation(p, -VectorXd::Ones(2)), InvalidArgument);
}

TEST(Nnls, RejectsNonFiniteAndMismatchedInput) {
    NnlsProblem p{MatrixXd::Identity(2, 2), VectorXd::Ones(2)};
    p.a(0, 1) = NAN;
    EXPECT_THROW(solve_nnls(p), InvalidArgument);
    NnlsProblem q{MatrixXd::Identity(2, 3), VectorXd::Ones(2)};
    EXPECT_THROW(solve_nnls(q), DimensionMismatch);
    NnlsProblem e{MatrixXd(0, 0), VectorXd(0)};
    EXPECT_THROW(solve_nnls(e), InvalidArgument);
}

TEST(Nnls, MatchesEnumerationOracle) {
    std::mt19937_64 rng(99);
    for (int k = 0; k < 300; ++k) {
        const Index m = 1 + static_cast<Index>(k % 6);
        const auto p = random_problem(rng, m, 8);
        const auto s = solve_nnls(p);
        EXPECT_TRUE((s.x.array() >= 0.0).all());
        EXPECT_NEAR(nnls_objective(p, s.x), oracle::nnls_enumerate(p.a, p.b), 1e-8);
        EXPECT_LE(s.kkt_violation, 1e-9);
        EXPECT_NEAR(kkt_violation(p, s.x), s.kkt_violation, 1e-15);
    }
}

TEST(Nnls, UnderdeterminedAndRankDeficient) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        auto p = random_problem(rng, 6, 3);  // more variables than residual rows
        p.a.row(5) = p.a.row(4);             // duplicated column of A^T
        const auto s = solve_nnls(p);
        EXPECT_NEAR(nnls_objective(p, s.x), oracle::nnls_enumerate(p.a, p.b), 1e-8);
        EXPECT_LE(s.kkt_violation, 1e-9);
    }
}

TEST(Nnls, GramFormAgreesWithDesignForm) {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 100; ++k) {
        const auto p = random_problem(rng, 5, 12);
        NnlsGramProblem g{p.a * p.a.transpose(), p.a * p.b, p.b.squaredNorm(), p.b.lpNorm<Eigen::Infinity>()};
        const auto sd = solve_nnls(p);
        const auto sg = solve_nnls(g);
        EXPECT_NEAR(nnls_objective(p, sg.x), nnls_objective(p, sd.x), 1e-10);
        EXPECT_LE((sg.x - sd.x).norm(), 1e-8);
        EXPECT_NEAR(sg.residual_norm, sd.residual_norm, 1e-7);
    }
}

TEST(Nnls, IdempotentFromSolution) {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 50; ++k) {
        const auto p = random_problem(rng, 5, 8);
        const auto s = solve_nnls(p);
        NnlsOptions opts;
        opts.warm_start = s.x;
        const auto again = solve_nnls(p, opts);
        EXPECT_LT(std::abs(nnls_objective(p, again.x) - nnls_objective(p, s.x)), 1e-12);
    }
}

TEST(Nnls, ScaleInvariant) {
    std::mt19937_64 rng(29);
    for (int k = 0; k < 50; ++k) {
        const auto p = random_problem(rng, 5, 8);
        for (double c : {1e-3, 7.0, 1e3}) {
            NnlsProblem q{c * p.a, c * p.b};
            EXPECT_LE((solve_nnls(q).x - solve_nnls(p).x).lpNorm<Eigen::Infinity>(), 1e-9) << c;
        }
    }
}

TEST(Nnls, ObjectiveNonincreasingAcrossIterations) {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 100; ++k) {
        const auto p = random_problem(rng, 6, 8);
        std::vector<double> trace;
        NnlsOptions opts;
        opts.on_iteration = [&](int, double obj) { trace.push_back(obj); };
        solve_nnls(p, opts);
        double prev = p.b.squaredNorm();
        for (double v : trace) {
            EXPECT_LE(v, prev + 1e-12);
            prev = v;
        }
    }
}

TEST(Nnls, WarmStartReachesSameOptimum) {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const auto p = random_problem(rng, 6, 9);
        NnlsOptions opts;
        opts.warm_start = VectorXd::NullaryExpr(6, [&] { return u(rng) > 1.0 ? u(rng) : 0.0; });
        const auto s = solve_nnls(p, opts);
        EXPECT_NEAR(nnls_objective(p, s.x), oracle::nnls_enumerate(p.a, p.b), 1e-8);
    }
}

TEST(Nnls, IterationCapFailureCarriesBestIterate) {
    std::mt19937_64 rng(41);
    NnlsProblem p;
    p.a = MatrixXd::Identity(4, 4);
    p.b = VectorXd::Ones(4);
    NnlsOptions opts;
    opts.max_iterations = 2;
    try {
        solve_nnls(p, opts);
        FAIL() << "expected NnlsFailure";
    } catch (const NnlsFailure& f) {
        EXPECT_EQ(f.best().iterations, 2);
        EXPECT_GT(f.best().kkt_violation, 0.0);
        EXPECT_TRUE((f.best().x.array() >= 0.0).all());
    }
}

TEST(Nnls, DegenerateTiesTerminate) {
    // identical columns and a zero right-hand side component give ties in the
    // entering rule
    NnlsProblem p;
    p.a = MatrixXd::Ones(4, 3);
    p.b = VectorXd::Ones(3);
    const auto s = solve_nnls(p);
    EXPECT_NEAR(nnls_objective(p, s.x), 0.0, 1e-12);
    EXPECT_GT(s.x[0], 0.0);  // smallest index enters first
}
