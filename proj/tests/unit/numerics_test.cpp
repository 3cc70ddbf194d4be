#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "msast/errors.hpp"
#include "msast/numerics/gradcheck.hpp"
#include "msast/numerics/kernels.hpp"
#include "msast/numerics/tape.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace msast;
namespace mt = msast::testing;
using msast::testing::random_mat;
using msast::testing::random_param;
namespace k = msast::kernels;

namespace {

Matrix col(std::initializer_list<float> v) {
  Matrix m(v.size(), 1);
  std::size_t i = 0;
  for (float x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

// ---- matmul ---------------------------------------------------------------

TEST(Matmul, IdentityLeavesOperandUnchanged) {
  const Matrix b = Matrix::from_rows({{3, 4}, {5, 6}});
  EXPECT_EQ(k::matmul(Matrix::identity(2), b), b);
}

TEST(Matmul, RowTimesColumn) {
  const Matrix out = k::matmul(Matrix::from_rows({{1, 2}}), Matrix::from_rows({{3}, {4}}));
  ASSERT_EQ(out.rows(), 1u);
  ASSERT_EQ(out.cols(), 1u);
  EXPECT_EQ(out(0, 0), 11.0f);
}

TEST(Matmul, ZeroLeftOperandGivesZeros) {
  mt::Rng rng(1);
  const Matrix out = k::matmul(Matrix(2, 3), random_mat<float>(3, 5, rng));
  EXPECT_EQ(out, Matrix(2, 5));
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  try {
    k::matmul(Matrix(2, 3), Matrix(4, 5));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("4x5"), std::string::npos) << msg;
  }
}

TEST(Matmul, MatchesNaiveSummationOnOddShapes) {
  mt::Rng rng(2);
  for (std::size_t m : {1u, 3u, 5u, 17u}) {
    for (std::size_t n : {1u, 7u, 33u, 70u}) {
      const std::size_t kk = 1 + (m * n) % 19;
      const MatrixD a = random_mat<double>(m, kk, rng);
      const MatrixD b = random_mat<double>(kk, n, rng);
      const MatrixD c = k::matmul(a, b);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double ref = 0.0;
          for (std::size_t q = 0; q < kk; ++q) ref += a(i, q) * b(q, j);
          EXPECT_NEAR(c(i, j), ref, 1e-12);
        }
    }
  }
}

TEST(Matmul, RowsDoNotDependOnRowCount) {
  mt::Rng rng(3);
  const Matrix a = random_mat<float>(37, 64, rng);
  const Matrix b = random_mat<float>(64, 64, rng);
  const Matrix full = k::matmul(a, b);
  for (std::size_t prefix : {1u, 2u, 3u, 5u, 36u}) {
    const Matrix part = k::matmul(a.slice_rows(0, prefix), b);
    EXPECT_EQ(part, full.slice_rows(0, prefix)) << "prefix " << prefix;
  }
}

// ---- dilated conv --------------------------------------------------------------

TEST(DilatedConv, CausalRunningSum) {
  const Matrix w = col({1, 1, 1});
  const Matrix y = k::dilated_conv1d(col({1, 2, 3, 4}), w, Matrix(1, 1), 3, 1, k::ConvMode::kCausal);
  EXPECT_EQ(y, col({1, 3, 6, 9}));
}

TEST(DilatedConv, SymmetricWindowSum) {
  const Matrix w = col({1, 1, 1});
  const Matrix y =
      k::dilated_conv1d(col({1, 2, 3, 4}), w, Matrix(1, 1), 3, 1, k::ConvMode::kSymmetric);
  EXPECT_EQ(y, col({3, 6, 9, 7}));
}

TEST(DilatedConv, ZeroInputZeroBiasGivesZeros) {
  mt::Rng rng(4);
  const Matrix w = random_mat<float>(5 * 3, 4, rng);
  for (auto mode : {k::ConvMode::kCausal, k::ConvMode::kSymmetric})
    EXPECT_EQ(k::dilated_conv1d(Matrix(9, 3), w, Matrix(1, 4), 5, 2, mode), Matrix(9, 4));
}

TEST(DilatedConv, RejectsBadDilationAndKernel) {
  EXPECT_THROW(k::dilated_conv1d(Matrix(4, 1), Matrix(3, 1), Matrix(1, 1), 3, 0,
                                 k::ConvMode::kCausal),
               ConfigError);
  EXPECT_THROW(k::dilated_conv1d(Matrix(4, 1), Matrix(0, 1), Matrix(1, 1), 0, 1,
                                 k::ConvMode::kCausal),
               ConfigError);
}

TEST(DilatedConv, MatchesDirectSummation) {
  mt::Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int kernel = std::vector<int>{1, 3, 5, 17}[trial % 4];
    const int dilation = 1 + trial % 5;
    const bool causal = trial % 2;
    const std::size_t T = 1 + trial * 3 % 40;
    const std::size_t cin = 1 + trial % 4, cout = 1 + trial % 3;
    const MatrixD x = random_mat<double>(T, cin, rng);
    const MatrixD w = random_mat<double>(kernel * cin, cout, rng);
    const MatrixD b = random_mat<double>(1, cout, rng);
    const MatrixD y = k::dilated_conv1d(x, w, b, kernel, dilation,
                                        causal ? k::ConvMode::kCausal : k::ConvMode::kSymmetric);
    const MatrixD ref = mt::conv_oracle(x, w, b, kernel, dilation, causal);
    EXPECT_LT(max_abs_diff(y, ref), 1e-12) << "trial " << trial;
  }
}

TEST(DilatedConv, CausalOutputIgnoresFutureExactly) {
  mt::Rng rng(6);
  const Matrix x = random_mat<float>(50, 8, rng);
  const Matrix w = random_mat<float>(3 * 8, 8, rng);
  const Matrix b = random_mat<float>(1, 8, rng);
  const Matrix y = k::dilated_conv1d(x, w, b, 3, 4, k::ConvMode::kCausal);
  for (std::size_t t : {0u, 1u, 7u, 25u, 48u}) {
    Matrix cut = x;
    for (std::size_t r = t + 1; r < cut.rows(); ++r)
      for (auto& v : cut.row(r)) v = 0.0f;
    const Matrix yc = k::dilated_conv1d(cut, w, b, 3, 4, k::ConvMode::kCausal);
    EXPECT_EQ(yc.slice_rows(0, t + 1), y.slice_rows(0, t + 1)) << "t=" << t;
  }
}

// ---- softmax ----------------------------------------------------------------

TEST(Softmax, EqualLogitsSplitEvenly) {
  const Matrix y = k::softmax_rows(Matrix::from_rows({{0, 0}}));
  EXPECT_FLOAT_EQ(y(0, 0), 0.5f);
  EXPECT_FLOAT_EQ(y(0, 1), 0.5f);
}

TEST(Softmax, LargeLogitDoesNotOverflow) {
  const Matrix y = k::softmax_rows(Matrix::from_rows({{1000, 0}}));
  EXPECT_TRUE(y.all_finite());
  EXPECT_NEAR(y(0, 0), 1.0f, 1e-7);
  EXPECT_NEAR(y(0, 1), 0.0f, 1e-7);
}

TEST(Softmax, LogOneTwoThree) {
  const Matrix y =
      k::softmax_rows(Matrix::from_rows({{0.0f, std::log(2.0f), std::log(3.0f)}}));
  EXPECT_NEAR(y(0, 0), 1.0 / 6, 1e-5);
  EXPECT_NEAR(y(0, 1), 2.0 / 6, 1e-5);
  EXPECT_NEAR(y(0, 2), 3.0 / 6, 1e-5);
}

TEST(Softmax, RowsSumToOneAndIgnoreShift) {
  mt::Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix x = random_mat<float>(1 + trial % 9, 1 + trial % 13, rng, -20, 20);
    const Matrix y = k::softmax_rows(x);
    Matrix shifted = x;
    const float shift = static_cast<float>(trial) - 50.0f;
    for (auto& v : shifted.flat()) v += shift;
    const Matrix ys = k::softmax_rows(shifted);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double s = 0.0;
      for (float v : y.row(r)) s += v;
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
    EXPECT_LE(max_abs_diff(y, ys), 1e-6f);
  }
}

TEST(Softmax, LogSoftmaxMatchesLogOfSoftmax) {
  mt::Rng rng(8);
  const MatrixD x = random_mat<double>(6, 5, rng, -3, 3);
  const MatrixD a = k::log_softmax_rows(x);
  const MatrixD b = k::softmax_rows(x);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], std::log(b.data()[i]), 1e-12);
}

// ---- relu / dropout ---------------------------------------------------------

TEST(Relu, ClampsNegatives) {
  EXPECT_EQ(k::relu(Matrix::from_rows({{-1, 0, 2}})), Matrix::from_rows({{0, 0, 2}}));
}

TEST(Dropout, RateZeroIsIdentityInTraining) {
  mt::Rng rng(9);
  const Matrix x = random_mat<float>(7, 5, rng);
  k::Rng gen(7);
  EXPECT_EQ(k::dropout(x, 0.0, gen, true).out, x);
}

TEST(Dropout, InferenceIsIdentity) {
  mt::Rng rng(10);
  const Matrix x = random_mat<float>(7, 5, rng);
  k::Rng gen(7);
  const k::Rng before = gen;
  EXPECT_EQ(k::dropout(x, 0.5, gen, false).out, x);
  EXPECT_EQ(gen, before);
}

TEST(Dropout, RateOneOrMoreIsConfigError) {
  k::Rng gen(1);
  EXPECT_THROW(k::dropout(Matrix(2, 2), 1.0, gen, true), ConfigError);
  EXPECT_THROW(k::dropout(Matrix(2, 2), -0.1, gen, true), ConfigError);
}

TEST(Dropout, DropsAboutRateAndRescalesSurvivors) {
  const Matrix x(200, 50, 1.0f);
  k::Rng gen(11);
  const auto r = k::dropout(x, 0.5, gen, true);
  std::size_t zeros = 0;
  for (float v : r.out.flat()) {
    if (v == 0.0f) ++zeros;
    else EXPECT_EQ(v, 2.0f);
  }
  EXPECT_NEAR(static_cast<double>(zeros) / x.size(), 0.5, 0.02);
}

// ---- temporal norm --------------------------------------------------------------

TEST(TemporalNorm, ConstantChannelBecomesZero) {
  const Matrix y = k::temporal_norm(Matrix(6, 2, 5.0f), Matrix(1, 2, 1.0f), Matrix(1, 2));
  EXPECT_EQ(y, Matrix(6, 2));
}

TEST(TemporalNorm, UnitVariancePreserved) {
  const Matrix y = k::temporal_norm(col({-1, 1}), Matrix(1, 1, 1.0f), Matrix(1, 1));
  EXPECT_NEAR(y(0, 0), -1.0f, 1e-3);
  EXPECT_NEAR(y(1, 0), 1.0f, 1e-3);
}

TEST(TemporalNorm, ZeroGainGivesBias) {
  mt::Rng rng(12);
  const Matrix bias = Matrix::from_rows({{0.5f, -2.0f, 3.0f}});
  const Matrix y = k::temporal_norm(random_mat<float>(5, 3, rng), Matrix(1, 3), bias);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(y(t, c), bias(0, c));
}

TEST(TemporalNorm, SingleFrameIsRejected) {
  EXPECT_THROW(k::temporal_norm(Matrix(1, 3), Matrix(1, 3, 1.0f), Matrix(1, 3)), ShapeError);
}

// ---- finite differences -------------------------------------------------------------

TEST(GradCheck, SquareAtThree) {
  Param<double> theta("theta", {}, 1, 1);
  theta.value(0, 0) = 3.0;
  auto f = [&](Tape<double>& tp) {
    const Var t = tp.param(theta);
    return ad::matmul(tp, t, t);
  };
  Param<double>* ps[] = {&theta};
  const auto rep = finite_diff_check(f, ps);
  ASSERT_TRUE(rep.ok);
  EXPECT_NEAR(rep.worst_analytic, 6.0, 1e-12);
  EXPECT_NEAR(rep.worst_numeric, 6.0, 1e-7);
  EXPECT_LT(rep.max_rel_error, 1e-6);
}

TEST(GradCheck, LinearFunctionIsExact) {
  mt::Rng rng(13);
  Param<double> x = random_param("x", 4, 3, rng);
  const MatrixD w = random_mat<double>(4, 3, rng);
  auto f = [&](Tape<double>& tp) { return ad::weighted_sum(tp, tp.param(x), w); };
  Param<double>* ps[] = {&x};
  const auto rep = finite_diff_check(f, ps);
  ASSERT_TRUE(rep.ok);
  EXPECT_LT(rep.max_rel_error, 1e-9);
}

TEST(GradCheck, ReportsNonFiniteLossWithParameterName) {
  Param<double> x("offending", {}, 1, 1);
  x.value(0, 0) = 1.0;
  auto f = [&](Tape<double>& tp) {
    const Var v = tp.param(x);
    const double val = tp.value(v)(0, 0);
    return tp.push(MatrixD(1, 1, val > 1.00005 ? NAN : val), {v},
                   [v](Tape<double>& t, Var self) { t.grad(v)(0, 0) += t.grad(self)(0, 0); });
  };
  Param<double>* ps[] = {&x};
  const auto rep = finite_diff_check(f, ps);
  EXPECT_FALSE(rep.ok);
  EXPECT_NE(rep.failure.find("offending"), std::string::npos);
}

// Every primitive against central differences: 100 random trials each.
class PrimitiveGradients : public ::testing::Test {
 protected:
  template <class Build>
  void check(const char* what, Build build) {
    mt::Rng rng(1234);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Param<double>> params;
      params.reserve(8);
      auto graph = build(rng, params, trial);
      std::vector<Param<double>*> ptrs;
      for (auto& p : params) ptrs.push_back(&p);
      const auto rep = finite_diff_check(graph, ptrs);
      ASSERT_TRUE(rep.ok) << what << ": " << rep.failure;
      worst = std::max(worst, rep.max_rel_error);
      ASSERT_LE(rep.max_rel_error, 1e-4)
          << what << " trial " << trial << " param " << rep.worst_param << "[" << rep.worst_index
          << "] analytic " << rep.worst_analytic << " numeric " << rep.worst_numeric;
    }
    RecordProperty(std::string(what) + "_max_rel_error", std::to_string(worst));
  }

  // Reduces a node to a scalar with fixed random weights.
  static Var reduce(Tape<double>& tp, Var v, const MatrixD& w) {
    return ad::weighted_sum(tp, v, w);
  }
};

TEST_F(PrimitiveGradients, Matmul) {
  check("matmul", [](mt::Rng& rng, std::vector<Param<double>>& ps, int trial) {
    const std::size_t m = 1 + trial % 5, kk = 1 + trial % 7, n = 1 + trial % 4;
    ps.push_back(random_param("a", m, kk, rng));
    ps.push_back(random_param("b", kk, n, rng));
    const MatrixD w = random_mat<double>(m, n, rng);
    return [&ps, w](Tape<double>& tp) {
      return reduce(tp, ad::matmul(tp, tp.param(ps[0]), tp.param(ps[1])), w);
    };
  });
}

TEST_F(PrimitiveGradients, LinearAndBias) {
  check("linear", [](mt::Rng& rng, std::vector<Param<double>>& ps, int trial) {
    const std::size_t m = 1 + trial % 6, kk = 1 + trial % 5, n = 1 + trial % 3;
    ps.push_back(random_param("x", m, kk, rng));
    ps.push_back(random_param("w", kk, n, rng));
    ps.push_back(random_param("b", 1, n, rng));
    const MatrixD w = random_mat<double>(m, n, rng);
    return [&ps, w](Tape<double>& tp) {
      const Var a = ad::linear(tp, tp.param(ps[0]), tp.param(ps[1]), tp.param(ps[2]));
      const Var b = ad::add_row_bias(tp, a, tp.param(ps[2]));
      return reduce(tp, b, w);
    };
  });
}

TEST_F(PrimitiveGradients, DilatedConv) {
  check("conv1d", [](mt::Rng& rng, std::vector<Param<double>>& ps, int trial) {
    const std::size_t kernel = std::vector<std::size_t>{1, 3, 5, 17}[trial % 4];
    const std::size_t dilation = 1 + trial % 3;
    const auto mode = trial % 2 ? k::ConvMode::kCausal : k::ConvMode::kSymmetric;
    const std::size_t T = 2 + trial % 11, cin = 1 + trial % 3, cout = 1 + trial % 2;
    ps.push_back(random_param("x", T, cin, rng));
    ps.push_back(random_param("w", kernel * cin, cout, rng));
    ps.push_back(random_param("b", 1, cout, rng));
    const MatrixD w = random_mat<double>(T, cout, rng);
    return [&ps, w, kernel, dilation, mode](Tape<double>& tp) {
      return reduce(tp,
                    ad::conv1d(tp, tp.param(ps[0]), tp.param(ps[1]), tp.param(ps[2]), kernel,
                               dilation, mode),
                    w);
    };
  });
}

TEST_F(PrimitiveGradients, Softmax) {
  check("softmax", [](mt::Rng& rng, std::vector<Param<double>>& ps, int trial) {
    const std::size_t m = 1 + trial % 5, n = 1 + trial % 6;
    ps.push_back(random_param("x", m, n, rng, -3, 3));
    const MatrixD w = random_mat<double>(m, n, rng);
    return [&ps, w](Tape<double>& tp) {
      return reduce(tp, ad::softmax_rows(tp, tp.param(ps[0])), w);
    };
  });
}

TEST_F(PrimitiveGradients, Relu) {
  check("relu", [](mt::Rng& rng, std::vector<Param<double>>& ps, int trial) {
    const std::size_t m = 1 + trial % 5, n = 1 + trial % 6;
    // entries kept off the kink
    Param<double> x = random_param("x", m, n, rng);
    for (auto& v : x.value.flat()) v = v >= 0 ? v + 0.01 : v - 0.01;
    ps.push_back(std::move(x));
    const MatrixD w = random_mat<double>(m, n, rng);
    return [&ps, w](Tape<double>& tp) { return reduce(tp, ad::relu(tp, tp.param(ps[0])), w); };
  });
}

TEST_F(PrimitiveGradients, DropoutWithFrozenMask) {
  check("dropout", [](mt::Rng& rng, std::vector<Param<double>>& ps, int trial) {
    const std::size_t m = 1 + trial % 5, n = 1 + trial % 6;
    ps.push_back(random_param("x", m, n, rng));
    const MatrixD w = random_mat<double>(m, n, rng);
    const std::uint64_t seed = rng();
    return [&ps, w, seed](Tape<double>& tp) {
      k::Rng gen(seed);
      return reduce(tp, ad::dropout(tp, tp.param(ps[0]), 0.3, gen, true), w);
    };
  });
}

TEST_F(PrimitiveGradients, TemporalNorm) {
  check("temporal_norm", [](mt::Rng& rng, std::vector<Param<double>>& ps, int trial) {
    const std::size_t T = 2 + trial % 9, c = 1 + trial % 4;
    ps.push_back(random_param("x", T, c, rng));
    ps.push_back(random_param("gain", 1, c, rng));
    ps.push_back(random_param("bias", 1, c, rng));
    const MatrixD w = random_mat<double>(T, c, rng);
    return [&ps, w](Tape<double>& tp) {
      return reduce(
          tp, ad::temporal_norm(tp, tp.param(ps[0]), tp.param(ps[1]), tp.param(ps[2])), w);
    };
  });
}

TEST_F(PrimitiveGradients, ConcatAndScale) {
  check("concat", [](mt::Rng& rng, std::vector<Param<double>>& ps, int trial) {
    const std::size_t T = 1 + trial % 6, a = 1 + trial % 3, b = 1 + trial % 4;
    ps.push_back(random_param("a", T, a, rng));
    ps.push_back(random_param("b", T, b, rng));
    const MatrixD w = random_mat<double>(T, a + b, rng);
    return [&ps, w](Tape<double>& tp) {
      const Var c = ad::concat_cols(tp, tp.param(ps[0]), tp.param(ps[1]));
      return reduce(tp, ad::scale(tp, c, 0.7), w);
    };
  });
}

TEST(Tape, ParamBindsToOneNode) {
  Param<double> p("p", {}, 1, 1);
  Tape<double> tp;
  EXPECT_EQ(tp.param(p).id, tp.param(p).id);
}

TEST(Tape, BackwardNeedsScalarRoot) {
  Tape<double> tp;
  const Var v = tp.constant(MatrixD(2, 2));
  EXPECT_THROW(tp.backward(v), ShapeError);
}

TEST(Tape, SharedParameterAccumulatesGradient) {
  Param<double> p("p", {}, 1, 1);
  p.value(0, 0) = 2.0;
  Tape<double> tp;
  const Var a = tp.param(p);
  const Var s = ad::add(tp, ad::scale(tp, a, 3.0), ad::scale(tp, a, 4.0));
  tp.backward(s);
  EXPECT_EQ((*tp.param_grad(p))(0, 0), 7.0);
}
