#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "courage/numerics/autograd.hpp"
#include "courage/numerics/gradient_check.hpp"
#include "courage/numerics/matrix.hpp"
#include "test_util.hpp"

using namespace courage;
using namespace courage::autograd;
using courage::testing::random_matrix;

TEST(Matrix, ShapeAndStorage) {
    Matrix m(2, 3, 1.5);
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(m.size(), 6u);
    EXPECT_EQ(m(1, 2), 1.5);
    EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
}

TEST(Matrix, IdentityTimesMIsM) {
    const auto m = random_matrix(3, 3, 7);
    EXPECT_EQ(matmul(Matrix::identity(3), m), m);
}

TEST(Matrix, HandMultiplication) {
    const Matrix a{{1, 2}, {3, 4}};
    const Matrix b{{0}, {1}};
    EXPECT_EQ(matmul(a, b), (Matrix{{2}, {4}}));
}

TEST(Matrix, MatmulRejectsMismatchedShapes) { EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError); }

TEST(Matrix, AssociativityProperty) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(seed);
        const auto a = random_matrix(5, 5, rng);
        const auto b = random_matrix(5, 5, rng);
        const auto c = random_matrix(5, 5, rng);
        EXPECT_LE(max_abs_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))), 1e-10) << "seed " << seed;
    }
}

TEST(Matrix, TransposedProductsAgreeWithExplicitTranspose) {
    std::mt19937_64 rng(3);
    const auto a = random_matrix(4, 3, rng);
    const auto b = random_matrix(4, 5, rng);
    Matrix tn(3, 5);
    matmul_tn_accumulate(a, b, tn);
    EXPECT_LE(max_abs_diff(tn, matmul(transpose(a), b)), 1e-14);
    const auto c = random_matrix(6, 3, rng);
    Matrix nt(4, 6);
    matmul_nt_accumulate(random_matrix(4, 3, 9), c, nt);
    EXPECT_LE(max_abs_diff(nt, matmul(random_matrix(4, 3, 9), transpose(c))), 1e-14);
}

namespace {

Matrix forward_value(const std::function<Var(Graph&, Var)>& op, const Matrix& x) {
    Graph g;
    return op(g, g.constant(x)).value();
}

} // namespace

TEST(Softmax, UniformRow) {
    const auto y = forward_value([](Graph&, Var x) { return softmax_rows(x); }, Matrix{{0, 0, 0, 0}});
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(y(0, j), 0.25);
}

TEST(Softmax, LargeLogitsDoNotOverflow) {
    const auto y = forward_value([](Graph&, Var x) { return softmax_rows(x); }, Matrix{{1000, 1000}});
    EXPECT_EQ(y(0, 0), 0.5);
    EXPECT_EQ(y(0, 1), 0.5);
}

TEST(Softmax, HandEvaluatedRow) {
    const auto y = forward_value([](Graph&, Var x) { return softmax_rows(x); }, Matrix{{0, std::log(3.0)}});
    EXPECT_NEAR(y(0, 0), 0.25, 1e-15);
    EXPECT_NEAR(y(0, 1), 0.75, 1e-15);
}

TEST(Softmax, RowsSumToOneProperty) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const auto x = random_matrix(5, 7, rng, -30.0, 30.0);
        const auto y = forward_value([](Graph&, Var v) { return softmax_rows(v); }, x);
        for (std::size_t r = 0; r < y.rows(); ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) {
                EXPECT_GE(y(r, c), 0.0);
                s += y(r, c);
            }
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
    }
}

TEST(Relu, Definition) {
    EXPECT_EQ(forward_value([](Graph&, Var x) { return relu(x); }, Matrix{{-1, 0, 2}}), (Matrix{{0, 0, 2}}));
    EXPECT_EQ(forward_value([](Graph&, Var x) { return relu(x); }, Matrix{{-1, -2}, {-3, -0.5}}), Matrix(2, 2));
}

TEST(Relu, PiecewiseDerivative) {
    Graph g;
    auto x = g.parameter(Matrix{{5, -5}});
    g.backward(sum(relu(x)));
    EXPECT_EQ(x.grad(), (Matrix{{1, 0}}));
}

TEST(Backward, SumOfParametersGivesUnitGradients) {
    Graph g;
    auto a = g.parameter(random_matrix(3, 2, 1));
    auto b = g.parameter(random_matrix(3, 2, 2));
    g.backward(sum(add(a, b)));
    EXPECT_EQ(a.grad(), Matrix(3, 2, 1.0));
    EXPECT_EQ(b.grad(), Matrix(3, 2, 1.0));
}

TEST(Backward, SquaredNormGivesTwiceW) {
    Graph g;
    const auto w0 = random_matrix(4, 3, 5);
    auto w = g.parameter(w0);
    g.backward(sum(hadamard(w, w)));
    EXPECT_LE(max_abs_diff(w.grad(), 2.0 * w0), 0.0);
}

TEST(Backward, SharedSubexpressionAccumulates) {
    Graph g;
    auto x = g.parameter(Matrix{{3.0}});
    auto y = add(x, x);
    g.backward(sum(hadamard(y, x))); // 2x^2
    EXPECT_EQ(x.grad()(0, 0), 12.0);
}

TEST(Backward, SecondCallWithoutZeroGradIsAnError) {
    Graph g;
    auto x = g.parameter(Matrix{{1.0}});
    auto loss = sum(hadamard(x, x));
    g.backward(loss);
    EXPECT_THROW(g.backward(loss), StateError);
    g.zero_grad();
    g.backward(loss);
    EXPECT_EQ(x.grad()(0, 0), 2.0);
}

TEST(Backward, LossMustBeScalar) {
    Graph g;
    auto x = g.parameter(Matrix(2, 2, 1.0));
    EXPECT_THROW(g.backward(x), StateError);
}

TEST(Backward, ConstantsReceiveNoGradient) {
    Graph g;
    auto c = g.constant(Matrix{{2.0}});
    auto p = g.parameter(Matrix{{3.0}});
    g.backward(sum(hadamard(c, p)));
    EXPECT_EQ(p.grad()(0, 0), 2.0);
    EXPECT_EQ(g.grad_slot(c.id()), nullptr);
}

TEST(Backward, DeterministicAcrossRuns) {
    auto run = [] {
        Graph g;
        auto a = g.parameter(random_matrix(4, 4, 11));
        auto b = g.parameter(random_matrix(4, 4, 12));
        g.backward(sum(softmax_rows(matmul(a, b))));
        return std::make_pair(a.grad(), b.grad());
    };
    EXPECT_EQ(run(), run());
}

TEST(Ops, NonFiniteResultNamesTheOperation) {
    Graph g;
    auto x = g.parameter(Matrix{{1e308}});
    try {
        scale(x, 1e10);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("scale"), std::string::npos);
    }
}

TEST(Ops, ShapeErrors) {
    Graph g;
    auto a = g.parameter(Matrix(2, 3));
    auto b = g.parameter(Matrix(3, 2));
    EXPECT_THROW(add(a, b), DimensionError);
    EXPECT_THROW(row_select(a, 2), DimensionError);
    EXPECT_THROW(broadcast_add_bias(a, g.parameter(Matrix(1, 2))), DimensionError);
    Graph other;
    EXPECT_THROW(add(a, other.parameter(Matrix(2, 3))), StateError);
}

TEST(Ops, ConcatSelectAndMean) {
    Graph g;
    auto a = g.constant(Matrix{{1, 2}, {3, 4}});
    auto b = g.constant(Matrix{{5}, {6}});
    EXPECT_EQ(concat_cols({a, b}).value(), (Matrix{{1, 2, 5}, {3, 4, 6}}));
    EXPECT_EQ(row_select(a, 1).value(), (Matrix{{3, 4}}));
    EXPECT_EQ(mean_rows(a).value(), (Matrix{{2, 3}}));
    EXPECT_EQ(transpose(a).value(), (Matrix{{1, 3}, {2, 4}}));
    EXPECT_EQ(broadcast_add_bias(a, g.constant(Matrix{{10, 20}})).value(), (Matrix{{11, 22}, {13, 24}}));
}

TEST(GradientCheck, ConstantFunctionHasZeroError) {
    const ScalarFn f = [](Graph& g, const std::vector<Var>&) { return g.constant(Matrix{{4.0}}); };
    EXPECT_EQ(gradient_check(f, {Matrix{{1.0, 2.0}}}), 0.0);
}

TEST(GradientCheck, SquareAtOne) {
    const ScalarFn f = [](Graph&, const std::vector<Var>& p) { return sum(hadamard(p[0], p[0])); };
    const auto r = gradient_check_detailed(f, {Matrix{{1.0}}});
    EXPECT_EQ(r.analytic, 2.0);
    const double by_hand = (1.00001 * 1.00001 - 0.99999 * 0.99999) / 2e-5;
    EXPECT_NEAR(r.numeric, by_hand, 1e-8);
    EXPECT_NEAR(r.numeric, 2.0, 1e-8);
}

TEST(GradientCheck, DetectsAWrongBackwardRule) {
    // x -> 2x with a backward rule that forgets the factor 2.
    const ScalarFn f = [](Graph& g, const std::vector<Var>& p) {
        Var x = p[0];
        Var y = g.make(2.0 * x.value(), {x}, [x](Graph& gr, std::size_t id) { gr.accumulate(x.id(), gr.grad(id)); },
                       "broken_double");
        return sum(y);
    };
    EXPECT_GT(gradient_check(f, {Matrix{{1.0, 2.0}}}), 0.4);
}

TEST(GradientCheck, NonFiniteLossThrows) {
    const ScalarFn f = [](Graph&, const std::vector<Var>& p) { return sum(scale(p[0], 1e300)); };
    EXPECT_THROW(gradient_check(f, {Matrix{{1e10}}}), NumericError);
}

// Every differentiable op against central differences on random 4x4 inputs.
struct OpCase {
    const char* name;
    std::size_t inputs;
    std::function<Var(Graph&, const std::vector<Var>&)> build;
};

class OpGradient : public ::testing::TestWithParam<OpCase> {};

TEST_P(OpGradient, MatchesFiniteDifferencesOver100Seeds) {
    const auto& c = GetParam();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed * 7919 + 17);
        std::vector<Matrix> params;
        for (std::size_t i = 0; i < c.inputs; ++i) params.push_back(random_matrix(4, 4, rng));
        const ScalarFn f = [&](Graph& g, const std::vector<Var>& p) {
            Var out = c.build(g, p);
            return sum(hadamard(out, g.constant(random_matrix(out.rows(), out.cols(), seed + 1000))));
        };
        worst = std::max(worst, gradient_check(f, params));
    }
    EXPECT_LE(worst, 1e-6) << c.name;
}

INSTANTIATE_TEST_SUITE_P(
    AllOps, OpGradient,
    ::testing::Values(
        OpCase{"matmul", 2, [](Graph&, const std::vector<Var>& p) { return matmul(p[0], p[1]); }},
        OpCase{"add", 2, [](Graph&, const std::vector<Var>& p) { return add(p[0], p[1]); }},
        OpCase{"hadamard", 2, [](Graph&, const std::vector<Var>& p) { return hadamard(p[0], p[1]); }},
        OpCase{"scale", 1, [](Graph&, const std::vector<Var>& p) { return scale(p[0], -2.5); }},
        OpCase{"transpose", 1, [](Graph&, const std::vector<Var>& p) { return transpose(p[0]); }},
        OpCase{"concat_cols", 2,
               [](Graph&, const std::vector<Var>& p) { return row_select(concat_cols({p[0], p[1]}), 1); }},
        OpCase{"row_select", 1, [](Graph&, const std::vector<Var>& p) { return row_select(p[0], 2); }},
        OpCase{"mean_rows", 1, [](Graph&, const std::vector<Var>& p) { return mean_rows(p[0]); }},
        OpCase{"broadcast_add_bias", 2,
               [](Graph&, const std::vector<Var>& p) { return broadcast_add_bias(p[0], row_select(p[1], 0)); }},
        OpCase{"softmax_rows", 1, [](Graph&, const std::vector<Var>& p) { return softmax_rows(p[0]); }},
        OpCase{"relu", 1, [](Graph&, const std::vector<Var>& p) { return relu(p[0]); }},
        OpCase{"layer_norm_rows", 2,
               [](Graph&, const std::vector<Var>& p) {
                   return layer_norm_rows(p[0], row_select(p[1], 0), row_select(p[1], 1));
               }},
        OpCase{"sum", 1, [](Graph&, const std::vector<Var>& p) { return sum(p[0]); }},
        OpCase{"chain", 2,
               [](Graph&, const std::vector<Var>& p) {
                   return relu(matmul(softmax_rows(p[0]), transpose(p[1])));
               }}),
    [](const ::testing::TestParamInfo<OpCase>& info) { return std::string(info.param.name); });
