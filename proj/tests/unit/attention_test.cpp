#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "msast/attention/sliding_window.hpp"
#include "msast/attention/window.hpp"
#include "msast/errors.hpp"
#include "msast/numerics/gradcheck.hpp"
#include "test_support.hpp"

using namespace msast;
using namespace msast::attention;
namespace mt = msast::testing;
using mt::random_mat;

// ---- schedule ---------------------------------------------------------------

TEST(WindowSchedule, KernelThree) {
  EXPECT_EQ(window_schedule(3, 1), 1u);
  EXPECT_EQ(window_schedule(3, 10), 512u);
}

TEST(WindowSchedule, KernelFive) {
  EXPECT_EQ(window_schedule(5, 2), 4u);
  EXPECT_EQ(window_schedule(5, 10), 1024u);
}

TEST(WindowSchedule, KernelSeventeen) {
  EXPECT_EQ(window_schedule(17, 2), 16u);
  EXPECT_EQ(window_schedule(17, 10), 4096u);
}

TEST(WindowSchedule, ClosedFormsForNamedKernels) {
  for (std::uint32_t l = 1; l <= 12; ++l) {
    EXPECT_EQ(window_schedule(3, l), 1u << (l - 1));
    EXPECT_EQ(window_schedule(5, l), l == 1 ? 1u : 1u << l);
    EXPECT_EQ(window_schedule(17, l), l == 1 ? 1u : 1u << (l + 2));
  }
}

TEST(WindowSchedule, NineStartsAtEightAndEndsAt2048) {
  EXPECT_EQ(window_schedule(9, 1), 1u);
  EXPECT_EQ(window_schedule(9, 2), 8u);
  EXPECT_EQ(window_schedule(9, 10), 2048u);
}

TEST(WindowSchedule, NondecreasingInLayer) {
  for (std::uint32_t k : {3u, 5u, 7u, 9u, 17u, 33u})
    for (std::uint32_t l = 1; l < 16; ++l)
      EXPECT_LE(window_schedule(k, l), window_schedule(k, l + 1)) << "k=" << k << " l=" << l;
}

TEST(WindowSchedule, RejectsKernelsWithoutARule) {
  EXPECT_THROW(window_schedule(4, 2), ConfigError);
  EXPECT_THROW(window_schedule(1, 2), ConfigError);
  EXPECT_THROW(window_schedule(3, 0), ConfigError);
}

TEST(WindowSpec, ForLayerUsesSchedule) {
  const auto s = WindowSpec::for_layer(17, 3, true);
  EXPECT_EQ(s.window_size, 32u);
  EXPECT_TRUE(s.causal);
}

// ---- mask ---------------------------------------------------------------------

TEST(AttentionMask, CausalFiveFromSix) {
  const std::size_t T = 10;
  const auto m = attention_mask(T, 5, true);
  std::set<std::size_t> admitted;
  for (std::size_t j = 0; j < T; ++j)
    if (m[6 * T + j]) admitted.insert(j);
  EXPECT_EQ(admitted, (std::set<std::size_t>{2, 3, 4, 5, 6}));
}

TEST(AttentionMask, WindowOneIsIdentity) {
  for (bool causal : {false, true}) {
    const std::size_t T = 7;
    const auto m = attention_mask(T, 1, causal);
    for (std::size_t i = 0; i < T; ++i)
      for (std::size_t j = 0; j < T; ++j) EXPECT_EQ(m[i * T + j], i == j);
  }
}

TEST(AttentionMask, WideAcausalWindowIsFull) {
  const std::size_t T = 9;
  const auto m = attention_mask(T, 2 * T, false);
  for (bool b : m) EXPECT_TRUE(b);
}

TEST(AttentionMask, AgreesWithAdmissibleKeys) {
  for (std::size_t T : {1u, 2u, 5u, 16u})
    for (std::size_t w : {1u, 2u, 3u, 5u, 16u, 40u})
      for (bool causal : {false, true}) {
        const auto m = attention_mask(T, w, causal);
        for (std::size_t t = 0; t < T; ++t) {
          const KeyRange r = admissible_keys(t, T, w, causal);
          for (std::size_t j = 0; j < T; ++j)
            EXPECT_EQ(m[t * T + j], j >= r.first && j <= r.last);
          EXPECT_TRUE(m[t * T + t]);
        }
      }
}

// ---- attention ---------------------------------------------------------------

TEST(SlidingWindowAttention, WindowOneReturnsValues) {
  mt::Rng rng(1);
  const Matrix q = random_mat<float>(6, 4, rng), k = random_mat<float>(6, 4, rng),
               v = random_mat<float>(6, 4, rng);
  for (bool causal : {false, true}) EXPECT_EQ(sliding_window_attention(q, k, v, 1, causal), v);
}

TEST(SlidingWindowAttention, WideWindowEqualsFullAttention) {
  mt::Rng rng(2);
  const MatrixD q = random_mat<double>(3, 2, rng), k = random_mat<double>(3, 2, rng),
                v = random_mat<double>(3, 2, rng);
  const MatrixD out = sliding_window_attention(q, k, v, 6, false);
  for (std::size_t t = 0; t < 3; ++t) {
    double z = 0.0;
    double acc[2] = {0, 0};
    for (std::size_t j = 0; j < 3; ++j) {
      const double s = std::exp((q(t, 0) * k(j, 0) + q(t, 1) * k(j, 1)) / std::sqrt(2.0));
      z += s;
      acc[0] += s * v(j, 0);
      acc[1] += s * v(j, 1);
    }
    EXPECT_NEAR(out(t, 0), acc[0] / z, 1e-12);
    EXPECT_NEAR(out(t, 1), acc[1] / z, 1e-12);
  }
}

TEST(SlidingWindowAttention, CausalRowsIgnoreFutureValues) {
  mt::Rng rng(3);
  const Matrix q = random_mat<float>(20, 5, rng), k = random_mat<float>(20, 5, rng);
  const Matrix v = random_mat<float>(20, 5, rng);
  const Matrix base = sliding_window_attention(q, k, v, 8, true);
  for (std::size_t t : {0u, 4u, 11u, 18u}) {
    Matrix v2 = v, k2 = k, q2 = q;
    for (std::size_t r = t + 1; r < 20; ++r)
      for (std::size_t c = 0; c < 5; ++c) {
        v2(r, c) += 3.0f;
        k2(r, c) -= 1.5f;
        q2(r, c) *= -2.0f;
      }
    const Matrix out = sliding_window_attention(q2, k2, v2, 8, true);
    EXPECT_EQ(out.slice_rows(0, t + 1), base.slice_rows(0, t + 1)) << "t=" << t;
  }
}

TEST(SlidingWindowAttention, ShapeMismatchThrows) {
  EXPECT_THROW(sliding_window_attention(Matrix(4, 3), Matrix(4, 2), Matrix(4, 3), 3, false),
               ShapeError);
  EXPECT_THROW(sliding_window_attention(Matrix(4, 3), Matrix(5, 3), Matrix(5, 3), 3, false),
               ShapeError);
}

TEST(SlidingWindowAttention, MatchesDenseReferenceOnRandomCases) {
  mt::Rng rng(4);
  std::uniform_int_distribution<std::size_t> len(1, 64), ch(1, 16);
  const std::size_t windows[] = {1, 2, 5, 16};
  float worst = 0.0f;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t T = len(rng), C = ch(rng);
    const std::size_t w = windows[trial % 4];
    const bool causal = (trial / 4) % 2;
    const Matrix q = random_mat<float>(T, C, rng, -2, 2), k = random_mat<float>(T, C, rng, -2, 2),
                 v = random_mat<float>(T, C, rng, -2, 2);
    const Matrix fast = sliding_window_attention(q, k, v, w, causal);
    const Matrix ref = dense_masked_attention_reference(q, k, v, attention_mask(T, w, causal));
    const float d = max_abs_diff(fast, ref);
    worst = std::max(worst, d);
    EXPECT_LE(d, 1e-6f) << "T=" << T << " C=" << C << " w=" << w << " causal=" << causal;
  }
  RecordProperty("max_abs_diff", std::to_string(worst));
}

TEST(SlidingWindowAttention, RowsStayInsideValueEnvelope) {
  mt::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t T = 1 + trial % 30, C = 1 + trial % 6, w = 1 + trial % 9;
    const bool causal = trial % 2;
    const Matrix q = random_mat<float>(T, C, rng, -3, 3), k = random_mat<float>(T, C, rng, -3, 3),
                 v = random_mat<float>(T, C, rng, -3, 3);
    const Matrix out = sliding_window_attention(q, k, v, w, causal);
    for (std::size_t t = 0; t < T; ++t) {
      const KeyRange r = admissible_keys(t, T, w, causal);
      for (std::size_t c = 0; c < C; ++c) {
        float lo = v(r.first, c), hi = v(r.first, c);
        for (std::size_t j = r.first; j <= r.last; ++j) {
          lo = std::min(lo, v(j, c));
          hi = std::max(hi, v(j, c));
        }
        EXPECT_GE(out(t, c), lo - 1e-6f);
        EXPECT_LE(out(t, c), hi + 1e-6f);
      }
    }
  }
}

TEST(SlidingWindowAttention, PrefixRowsMatchFullSequenceExactly) {
  mt::Rng rng(6);
  const Matrix q = random_mat<float>(40, 64, rng), k = random_mat<float>(40, 64, rng),
               v = random_mat<float>(40, 64, rng);
  const Matrix full = sliding_window_attention(q, k, v, 16, true);
  for (std::size_t n : {1u, 9u, 17u, 39u}) {
    const Matrix part = sliding_window_attention(q.slice_rows(0, n), k.slice_rows(0, n),
                                                 v.slice_rows(0, n), 16, true);
    EXPECT_EQ(part, full.slice_rows(0, n));
  }
}

// ---- dense reference ------------------------------------------------------------

TEST(DenseReference, FullMaskTwoFrames) {
  const MatrixD q = MatrixD::from_rows({{1, 0}, {0, 1}});
  const MatrixD k = MatrixD::from_rows({{1, 0}, {0, 1}});
  const MatrixD v = MatrixD::from_rows({{2, 0}, {0, 4}});
  const MatrixD out = dense_masked_attention_reference(q, k, v, std::vector<bool>(4, true));
  const double a = std::exp(1.0 / std::sqrt(2.0));
  const double p = a / (a + 1.0);
  EXPECT_NEAR(out(0, 0), 2.0 * p, 1e-12);
  EXPECT_NEAR(out(0, 1), 4.0 * (1.0 - p), 1e-12);
  EXPECT_NEAR(out(1, 0), 2.0 * (1.0 - p), 1e-12);
  EXPECT_NEAR(out(1, 1), 4.0 * p, 1e-12);
}

TEST(DenseReference, IdentityMaskReturnsValues) {
  mt::Rng rng(7);
  const MatrixD q = random_mat<double>(5, 3, rng), k = random_mat<double>(5, 3, rng),
                v = random_mat<double>(5, 3, rng);
  EXPECT_EQ(dense_masked_attention_reference(q, k, v, attention_mask(5, 1, false)), v);
}

TEST(DenseReference, ZeroQueryAveragesAdmissibleValues) {
  mt::Rng rng(8);
  const std::size_t T = 8;
  const MatrixD k = random_mat<double>(T, 3, rng), v = random_mat<double>(T, 3, rng);
  const auto mask = attention_mask(T, 3, true);
  const MatrixD out = dense_masked_attention_reference(MatrixD(T, 3), k, v, mask);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      int n = 0;
      for (std::size_t j = 0; j < T; ++j)
        if (mask[t * T + j]) {
          s += v(j, c);
          ++n;
        }
      EXPECT_NEAR(out(t, c), s / n, 1e-12);
    }
}

TEST(DenseReference, EmptyMaskRowIsLogicError) {
  std::vector<bool> mask(4, true);
  mask[2] = mask[3] = false;
  EXPECT_THROW(dense_masked_attention_reference(MatrixD(2, 1), MatrixD(2, 1), MatrixD(2, 1), mask),
               LogicError);
}

// ---- gradient ---------------------------------------------------------------

TEST(SlidingWindowAttentionGrad, MatchesFiniteDifferences) {
  mt::Rng rng(9);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t T = 1 + trial % 12, C = 1 + trial % 5;
    const std::size_t w = std::vector<std::size_t>{1, 2, 5, 16}[trial % 4];
    const bool causal = (trial / 4) % 2;
    Param<double> q = mt::random_param("q", T, C, rng), k = mt::random_param("k", T, C, rng),
                  v = mt::random_param("v", T, C, rng);
    const MatrixD weights = random_mat<double>(T, C, rng);
    auto f = [&](Tape<double>& tp) {
      return ad::weighted_sum(
          tp, ad::sliding_window_attention(tp, tp.param(q), tp.param(k), tp.param(v), w, causal),
          weights);
    };
    Param<double>* ps[] = {&q, &k, &v};
    const auto rep = finite_diff_check(f, ps);
    ASSERT_TRUE(rep.ok);
    worst = std::max(worst, rep.max_rel_error);
    EXPECT_LE(rep.max_rel_error, 1e-4) << "trial " << trial << " " << rep.worst_param;
  }
  RecordProperty("max_rel_error", std::to_string(worst));
}
