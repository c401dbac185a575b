#include "qrc/reservoir.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qrc;
using namespace qrc::reservoir;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = u(gen);
    return m;
}

} // namespace

TEST(Embed, InterleavesOneZero)
{
    EXPECT_EQ(embed(vec({1, 2, 3, 4}), 8), vec({1, 0, 2, 0, 3, 0, 4, 0}));
}

TEST(Embed, InterleavesTwoZeros)
{
    EXPECT_EQ(embed(vec({1, 2, 3, 4}), 12), vec({1, 0, 0, 2, 0, 0, 3, 0, 0, 4, 0, 0}));
}

TEST(Embed, SameLengthIsIdentity)
{
    EXPECT_EQ(embed(vec({5, 6, 7}), 3), vec({5, 6, 7}));
}

TEST(Embed, RejectsNonMultiple)
{
    EXPECT_THROW((void)embed(vec({1, 2, 3, 4}), 10), InvalidArgument);
    EXPECT_THROW((void)embed(vec({1, 2, 3, 4}), 2), InvalidArgument);
}

TEST(Shift, ForwardByOne)
{
    EXPECT_EQ(shift(vec({1, 2, 3, 4}), 1), vec({2, 3, 4, 1}));
}

TEST(Shift, ZeroIsIdentity)
{
    EXPECT_EQ(shift(vec({1, 2, 3, 4}), 0), vec({1, 2, 3, 4}));
}

TEST(Shift, NegativeWraps)
{
    EXPECT_EQ(shift(vec({1, 2, 3, 4}), -1), vec({4, 1, 2, 3}));
    EXPECT_EQ(shift(vec({1, 2, 3, 4}), -5), vec({4, 1, 2, 3}));
    EXPECT_EQ(shift(vec({1, 2, 3, 4}), 6), vec({3, 4, 1, 2}));
}

TEST(Shift, FullTurnIsIdentity)
{
    std::mt19937_64 gen(1);
    const Eigen::VectorXd r = random_matrix(12, 1, gen);
    for (long n : {1L, -1L, 5L, 4L}) {
        Eigen::VectorXd x = r;
        for (int k = 0; k < 12; ++k)
            x = shift(x, n);
        EXPECT_EQ(x, r);
    }
}

TEST(Update, HandExample)
{
    const ReservoirConfig cfg{0.5, 1, 4};
    EXPECT_EQ(update(vec({1, 1, 1, 1}), vec({1, 2}), cfg), vec({1.5, 0.5, 2.5, 0.5}));
}

TEST(Update, MemorylessReducesToEmbed)
{
    std::mt19937_64 gen(2);
    const ReservoirConfig cfg{0.0, 1, 12};
    const Eigen::VectorXd m = random_matrix(4, 1, gen);
    EXPECT_EQ(update(random_matrix(12, 1, gen), m, cfg), embed(m, 12));
}

TEST(Update, UnitGammaPreservesNorm)
{
    std::mt19937_64 gen(3);
    const ReservoirConfig cfg{1.0, 3, 12};
    Eigen::VectorXd r = random_matrix(12, 1, gen);
    const double n0 = r.norm();
    for (int k = 0; k < 50; ++k)
        r = update(r, Eigen::VectorXd::Zero(4), cfg);
    EXPECT_NEAR(r.norm(), n0, 1e-14);
}

TEST(Update, Linearity)
{
    std::mt19937_64 gen(4);
    const ReservoirConfig cfg{0.7, 1, 12};
    const Eigen::VectorXd r1 = random_matrix(12, 1, gen), r2 = random_matrix(12, 1, gen);
    const Eigen::VectorXd m1 = random_matrix(4, 1, gen), m2 = random_matrix(4, 1, gen);
    const double a = 0.3, b = -1.7;
    const Eigen::VectorXd lhs = update(a * r1 + b * r2, a * m1 + b * m2, cfg);
    const Eigen::VectorXd rhs = a * update(r1, m1, cfg) + b * update(r2, m2, cfg);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Update, DimensionChecks)
{
    const ReservoirConfig cfg{0.5, 1, 8};
    EXPECT_THROW((void)update(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(4), cfg), DimensionMismatch);
    EXPECT_THROW((void)update(Eigen::VectorXd::Zero(8), Eigen::VectorXd::Zero(3), cfg), InvalidArgument);
}

TEST(Config, Validation)
{
    EXPECT_NO_THROW((ReservoirConfig{0.5, 1, 270}.validate(90)));
    EXPECT_THROW((ReservoirConfig{1.5, 1, 270}.validate(90)), InvalidArgument);
    EXPECT_THROW((ReservoirConfig{0.5, 1, 100}.validate(90)), InvalidArgument);
    EXPECT_THROW((ReservoirConfig{0.5, 1, 45}.validate(90)), InvalidArgument);
    EXPECT_EQ(ReservoirConfig::with_default_length(0.5, 1, 90).length, 270);
}

TEST(RunSequence, EmptyAndSingle)
{
    const ReservoirConfig cfg{0.0, 1, 8};
    EXPECT_EQ(run_sequence(Eigen::MatrixXd(0, 4), cfg).rows(), 0);
    Eigen::MatrixXd f(1, 4);
    f << 1, 2, 3, 4;
    EXPECT_EQ(run_sequence(f, cfg).row(0).transpose(), embed(f.row(0).transpose(), 8));
}

TEST(RunSequence, TwoStepsUnrolled)
{
    std::mt19937_64 gen(5);
    const ReservoirConfig cfg{0.5, 1, 12};
    const Eigen::MatrixXd f = random_matrix(2, 4, gen);
    const auto rows = run_sequence(f, cfg);
    const Eigen::VectorXd expected = 0.5 * shift(embed(f.row(0).transpose(), 12), 1) + embed(f.row(1).transpose(), 12);
    EXPECT_LT((rows.row(1).transpose() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RunSequence, ImpulseResponseDecaysGeometrically)
{
    const double gamma = 0.8;
    const ReservoirConfig cfg{gamma, 1, 12};
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(20, 4);
    f(0, 2) = 1.0;
    const auto rows = run_sequence(f, cfg);
    for (Eigen::Index j = 0; j < 20; ++j) {
        // A single unit entry is only permuted by the shift, so its magnitude is gamma^j.
        EXPECT_NEAR(rows.row(j).cwiseAbs().maxCoeff(), std::pow(gamma, static_cast<double>(j)), 1e-12);
        EXPECT_NEAR(rows.row(j).sum(), std::pow(gamma, static_cast<double>(j)), 1e-12);
    }
}

TEST(RunSequence, NonZeroInitialState)
{
    const ReservoirConfig cfg{0.5, 1, 4};
    Eigen::MatrixXd f(1, 2);
    f << 1, 2;
    EXPECT_EQ(run_sequence(f, cfg, vec({1, 1, 1, 1})).row(0).transpose(), vec({1.5, 0.5, 2.5, 0.5}));
}

// Swapping the two halves of every feature vector maps every reservoir state
// to its cyclic shift by l_r / 2 when l_r is an even multiple of the feature length.
TEST(RunSequence, HalfSwapIsHalfTurn)
{
    std::mt19937_64 gen(6);
    for (Eigen::Index q : {2, 4}) {
        const Eigen::Index block = 5, feat = 2 * block, len = q * feat;
        for (long n_shift : {1L, -3L, 7L}) {
            const ReservoirConfig cfg{0.9, n_shift, len};
            const Eigen::MatrixXd f = random_matrix(40, feat, gen);
            Eigen::MatrixXd swapped(f.rows(), feat);
            swapped << f.rightCols(block), f.leftCols(block);
            const auto a = run_sequence(f, cfg);
            const auto b = run_sequence(swapped, cfg);
            for (Eigen::Index k = 0; k < f.rows(); ++k)
                EXPECT_LT((shift(a.row(k).transpose(), len / 2) - b.row(k).transpose()).cwiseAbs().maxCoeff(), 1e-13);
        }
    }
}
