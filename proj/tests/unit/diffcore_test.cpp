// Copyright (c) 2026 The sswp-prosody Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "sswp/common/error.h"
#include "sswp/diffcore/gradcheck.h"
#include "sswp/diffcore/ops.h"
#include "sswp/diffcore/optim.h"

namespace sswp::diff {
namespace {

Tensor<double> random_tensor(std::vector<int> dims, std::mt19937_64& rng, double lo = -1.0,
                             double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor<double> t(std::move(dims));
  for (auto& v : t.data()) v = u(rng);
  return t;
}

TEST(Ops, SoftmaxOfEqualLogitsIsUniform) {
  Graph<float> g;
  auto y = softmax(g.constant(Tensor<float>({1, 3}, 0.0f)));
  for (float v : y.value().data()) EXPECT_NEAR(v, 1.0f / 3.0f, 1e-7);
}

TEST(Ops, SoftmaxIsStableForHugeLogits) {
  Graph<float> g;
  Tensor<float> x({2, 3}, std::vector<float>{1e4f, -1e4f, 0.0f, -1e4f, -1e4f, -1e4f});
  auto p = softmax(g.constant(x));
  auto lp = log_softmax(g.constant(x));
  for (float v : p.value().data()) EXPECT_TRUE(std::isfinite(v));
  for (float v : lp.value().data()) EXPECT_TRUE(std::isfinite(v));
  EXPECT_FLOAT_EQ(p.value().at(0, 0), 1.0f);
  EXPECT_NEAR(p.value().at(1, 2), 1.0f / 3.0f, 1e-6);
  for (int r = 0; r < 2; ++r) {
    float s = 0;
    for (float v : p.value().row(r)) s += v;
    EXPECT_NEAR(s, 1.0f, 1e-6);
  }
}

TEST(Ops, LayerNormOfConstantRowIsZero) {
  Graph<float> g;
  auto x = g.constant(Tensor<float>({2, 4}, 3.5f));
  auto y = layer_norm(x, g.constant(Tensor<float>({1, 4}, 1.0f)),
                      g.constant(Tensor<float>({1, 4}, 0.0f)));
  for (float v : y.value().data()) EXPECT_EQ(v, 0.0f);
}

TEST(Ops, MatmulMatchesNaiveTripleLoop) {
  std::mt19937_64 rng(11);
  auto a = random_tensor({2, 3}, rng);
  auto b = random_tensor({3, 2}, rng);
  Graph<double> g;
  auto c = matmul(g.constant(a), g.constant(b)).value();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double ref = 0.0;
      for (int k = 0; k < 3; ++k) ref += a.at(i, k) * b.at(k, j);
      EXPECT_NEAR(c.at(i, j), ref, 1e-12);
    }
  }
}

TEST(Ops, ShapeMismatchNamesOpAndDims) {
  Graph<float> g;
  auto a = g.constant(Tensor<float>({2, 3}));
  auto b = g.constant(Tensor<float>({2, 3}));
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("matmul"), std::string::npos);
    EXPECT_NE(msg.find("[2x3]"), std::string::npos);
  }
  EXPECT_THROW(add(a, g.constant(Tensor<float>({3, 2}))), ShapeError);
  EXPECT_THROW(slice_rows(a, 1, 5), ShapeError);
}

TEST(Ops, Float32AgreesWithFloat64) {
  std::mt19937_64 rng(5);
  auto x64 = random_tensor({4, 8}, rng);
  auto w64 = random_tensor({8, 8}, rng);
  auto run = [&](auto tag) {
    using T = decltype(tag);
    Graph<T> g;
    auto x = g.constant(x64.cast<T>());
    auto w = g.constant(w64.cast<T>());
    auto h = gelu(matmul(x, w));
    auto y = layer_norm(h, g.constant(Tensor<T>({1, 8}, T(1))), g.constant(Tensor<T>({1, 8}, T(0))));
    return softmax(tanh(y)).value().template cast<double>();
  };
  auto a = run(float{});
  auto b = run(double{});
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LE(std::abs(a[i] - b[i]), 1e-3 * std::max(1e-6, std::abs(b[i])));
  }
}

TEST(Backward, SumGivesOnes) {
  Graph<double> g;
  auto x = g.variable(Tensor<double>({2, 3}, 0.7));
  g.backward(sum_all(x));
  for (double v : g.grad(x.id).data()) EXPECT_EQ(v, 1.0);
}

TEST(Backward, SumOfSquares) {
  Graph<double> g;
  auto x = g.variable(Tensor<double>({1, 2}, std::vector<double>{1.0, 2.0}));
  g.backward(sum_all(mul(x, x)));
  EXPECT_EQ(g.grad(x.id)[0], 2.0);
  EXPECT_EQ(g.grad(x.id)[1], 4.0);
}

TEST(Backward, NonScalarLossRejected) {
  Graph<double> g;
  auto x = g.variable(Tensor<double>({1, 2}));
  EXPECT_THROW(g.backward(x), ShapeError);
}

TEST(Backward, UnusedParameterGetsZeroGrad) {
  ParamStore<double> ps;
  auto& used = ps.add("used", Tensor<double>({1, 2}, 1.0));
  auto& unused = ps.add("unused", Tensor<double>({1, 2}, 1.0));
  ps.zero_grad();
  Graph<double> g;
  auto u = g.param(used);
  auto n = g.param(unused);
  auto side = exp(n);  // recorded but not on the loss path
  g.backward(sum_all(u));
  for (double v : unused.grad.data()) EXPECT_EQ(v, 0.0);
  for (double v : g.grad(side.id).data()) EXPECT_EQ(v, 0.0);
  for (double v : used.grad.data()) EXPECT_EQ(v, 1.0);
}

TEST(Backward, TraceRecordsOpsInOrder) {
  Graph<double> g;
  auto x = g.variable(Tensor<double>({1, 2}, 1.0));
  auto l = sum_all(tanh(x));
  auto ops = g.trace();
  ASSERT_EQ(ops.size(), 3u);
  EXPECT_EQ(ops[0], "variable");
  EXPECT_EQ(ops[1], "tanh");
  EXPECT_EQ(ops[2], "sum_all");
  g.backward(l);
}

// Builds loss = sum(op(inputs) * R) for a fixed random R, so every output
// coordinate carries a distinct weight.
struct OpCase {
  std::string name;
  std::vector<std::vector<int>> input_dims;
  std::function<Expr<double>(Graph<double>&, std::vector<Expr<double>>&)> op;
  double lo = -1.0, hi = 1.0;
};

std::vector<OpCase> op_cases() {
  std::vector<OpCase> cs;
  cs.push_back({"matmul", {{3, 4}, {4, 2}}, [](auto&, auto& x) { return matmul(x[0], x[1]); }});
  cs.push_back({"matmul_nt", {{3, 4}, {2, 4}}, [](auto&, auto& x) { return matmul_nt(x[0], x[1]); }});
  cs.push_back({"pairwise_dot", {{3, 4}, {3, 4}}, [](auto&, auto& x) { return pairwise_dot(x[0], x[1]); }});
  cs.push_back({"transpose", {{3, 2}}, [](auto&, auto& x) { return transpose(x[0]); }});
  cs.push_back({"add", {{3, 4}, {1, 4}}, [](auto&, auto& x) { return add(x[0], x[1]); }});
  cs.push_back({"sub", {{3, 4}, {3, 1}}, [](auto&, auto& x) { return sub(x[0], x[1]); }});
  cs.push_back({"mul", {{3, 4}, {3, 4}}, [](auto&, auto& x) { return mul(x[0], x[1]); }});
  cs.push_back({"mul_broadcast", {{3, 4}, {1, 1}}, [](auto&, auto& x) { return mul(x[0], x[1]); }});
  cs.push_back({"scale", {{2, 3}}, [](auto&, auto& x) { return scale(x[0], 2.5); }});
  cs.push_back({"exp", {{2, 3}}, [](auto&, auto& x) { return exp(x[0]); }});
  cs.push_back({"log", {{2, 3}}, [](auto&, auto& x) { return log(x[0]); }, 0.5, 2.0});
  cs.push_back({"tanh", {{2, 3}}, [](auto&, auto& x) { return tanh(x[0]); }});
  cs.push_back({"sigmoid", {{2, 3}}, [](auto&, auto& x) { return sigmoid(x[0]); }});
  cs.push_back({"swish", {{2, 3}}, [](auto&, auto& x) { return swish(x[0]); }});
  cs.push_back({"gelu", {{2, 3}}, [](auto&, auto& x) { return gelu(x[0]); }});
  cs.push_back({"softmax_rows", {{3, 4}}, [](auto&, auto& x) { return softmax(x[0], 1); }});
  cs.push_back({"softmax_cols", {{3, 4}}, [](auto&, auto& x) { return softmax(x[0], 0); }});
  cs.push_back({"log_softmax_rows", {{3, 4}}, [](auto&, auto& x) { return log_softmax(x[0], 1); }});
  cs.push_back({"log_softmax_cols", {{3, 4}}, [](auto&, auto& x) { return log_softmax(x[0], 0); }});
  cs.push_back({"layer_norm", {{3, 5}, {1, 5}, {1, 5}},
                [](auto&, auto& x) { return layer_norm(x[0], x[1], x[2]); }});
  cs.push_back({"embedding", {{5, 3}}, [](auto&, auto& x) {
                  static const std::vector<int> ids{4, -1, 0, 4, 2};
                  return embedding(x[0], std::span<const int>(ids));
                }});
  cs.push_back({"concat_rows", {{2, 3}, {1, 3}}, [](auto&, auto& x) {
                  return concat(std::vector<Expr<double>>{x[0], x[1]}, 0);
                }});
  cs.push_back({"concat_cols", {{2, 3}, {2, 2}}, [](auto&, auto& x) {
                  return concat(std::vector<Expr<double>>{x[0], x[1]}, 1);
                }});
  cs.push_back({"slice_rows", {{4, 3}}, [](auto&, auto& x) { return slice_rows(x[0], 1, 3); }});
  cs.push_back({"slice_cols", {{4, 3}}, [](auto&, auto& x) { return slice_cols(x[0], 1, 3); }});
  cs.push_back({"reshape", {{4, 3}}, [](auto&, auto& x) { return reshape(x[0], {2, 6}); }});
  cs.push_back({"masked_fill", {{2, 3}}, [](auto&, auto& x) {
                  static const std::vector<std::uint8_t> m{0, 1, 0, 0, 0, 1};
                  return masked_fill(x[0], std::span<const std::uint8_t>(m), -3.0);
                }});
  cs.push_back({"sum_rows", {{3, 4}}, [](auto&, auto& x) { return sum(x[0], 1); }});
  cs.push_back({"mean_cols", {{3, 4}}, [](auto&, auto& x) { return mean(x[0], 0); }});
  cs.push_back({"depthwise_conv1d", {{10, 3}, {5, 3}},
                [](auto&, auto& x) { return depthwise_conv1d(x[0], x[1], 5); }});
  cs.push_back({"l2_normalize_rows", {{3, 4}}, [](auto&, auto& x) { return l2_normalize_rows(x[0]); }});
  cs.push_back({"pick", {{3, 4}}, [](auto&, auto& x) {
                  static const std::vector<int> idx{2, 0, 3};
                  return pick(x[0], std::span<const int>(idx));
                }});
  cs.push_back({"segment_attention", {{8, 4}, {8, 4}, {8, 4}}, [](auto&, auto& x) {
                  static const std::vector<int> lens{4, 2};
                  return segment_attention(x[0], x[1], x[2], 4, 2, std::span<const int>(lens));
                }});
  cs.push_back({"segment_weighted_sum", {{2, 3}, {6, 4}},
                [](auto&, auto& x) { return segment_weighted_sum(x[0], x[1]); }});
  return cs;
}

void PrintTo(const OpCase& c, std::ostream* os) { *os << c.name; }

class OpGradient : public ::testing::TestWithParam<OpCase> {};

TEST_P(OpGradient, MatchesCentralDifferencesAtTenPoints) {
  const OpCase& c = GetParam();
  std::mt19937_64 rng(std::hash<std::string>{}(c.name));
  for (int trial = 0; trial < 10; ++trial) {
    ParamStore<double> ps;
    for (std::size_t i = 0; i < c.input_dims.size(); ++i) {
      ps.add("x" + std::to_string(i), random_tensor(c.input_dims[i], rng, c.lo, c.hi));
    }
    Tensor<double> weights;
    {
      Graph<double> g;
      std::vector<Expr<double>> xs;
      for (auto& p : ps) xs.push_back(g.param(*p));
      auto out = c.op(g, xs);
      weights = random_tensor(out.value().dims(), rng);
    }
    auto loss = [&](Graph<double>& g) {
      std::vector<Expr<double>> xs;
      for (auto& p : ps) xs.push_back(g.param(*p));
      return sum_all(mul(c.op(g, xs), g.constant(weights)));
    };
    auto res = check_gradients(c.name, ps, loss);
    EXPECT_TRUE(res.passed) << c.name << " trial " << trial << " max rel err "
                            << res.max_rel_error << " at " << res.worst_param;
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::ValuesIn(op_cases()),
                         [](const auto& info) { return info.param.name; });

TEST(GradCheck, CorruptedBackwardIsDetected) {
  std::mt19937_64 rng(3);
  ParamStore<double> ps;
  ps.add("x", random_tensor({2, 3}, rng));
  auto loss = [&](Graph<double>& g) { return sum_all(tanh(g.param(ps.get("x")))); };
  testing::set_backward_fault("tanh");
  auto bad = check_gradients("tanh", ps, loss);
  testing::set_backward_fault("");
  auto good = check_gradients("tanh", ps, loss);
  EXPECT_FALSE(bad.passed);
  EXPECT_GT(bad.max_rel_error, 0.1);
  EXPECT_TRUE(good.passed);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParamStore<float> ps;
  auto& p = ps.add("p", Tensor<float>({1, 3}, std::vector<float>{1.0f, -2.0f, 0.5f}));
  ps.zero_grad();
  AdamState<float> st;
  adam_step(ps, st, 0.1);
  EXPECT_EQ(p.value[0], 1.0f);
  EXPECT_EQ(p.value[1], -2.0f);
  EXPECT_EQ(p.value[2], 0.5f);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamStore<double> ps;
  auto& p = ps.add("p", Tensor<double>::scalar(1.0));
  p.grad[0] = 1.0;
  AdamState<double> st;
  adam_step(ps, st, 0.1);
  EXPECT_NEAR(p.value[0], 0.9, 1e-8);
}

TEST(Adam, TwoStepsMatchReferenceTrajectory) {
  // loss = p^2 from p = 1, lr = 0.1; reference values from a standalone
  // evaluation of the Adam recurrences.
  ParamStore<double> ps;
  auto& p = ps.add("p", Tensor<double>::scalar(1.0));
  AdamState<double> st;
  const double expected[] = {0.9000000005, 0.8004122286917928};
  for (double want : expected) {
    p.grad[0] = 2.0 * p.value[0];
    adam_step(ps, st, 0.1);
    EXPECT_NEAR(p.value[0], want, 1e-12);
  }
  EXPECT_EQ(st.step, 2);
}

TEST(Adam, NanGradientAbortsNamingParameter) {
  ParamStore<float> ps;
  ps.add("good", Tensor<float>({1, 2}, 1.0f));
  auto& bad = ps.add("enc.bad", Tensor<float>({1, 2}, 1.0f));
  ps.zero_grad();
  bad.grad[1] = std::nanf("");
  AdamState<float> st;
  try {
    adam_step(ps, st, 0.1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("enc.bad"), std::string::npos);
  }
  EXPECT_EQ(st.step, 0);
  EXPECT_EQ(ps.get("good").value[0], 1.0f);
}

TEST(Adam, DeterministicTrajectories) {
  auto run = [] {
    std::mt19937_64 rng(9);
    ParamStore<float> ps;
    ps.add_glorot("w", 4, 3, rng);
    AdamState<float> st;
    Tensor<float> x({2, 4}, std::vector<float>{0.1f, -0.3f, 0.2f, 0.9f, 0.5f, 0.4f, -0.6f, 0.0f});
    for (int i = 0; i < 20; ++i) {
      ps.zero_grad();
      Graph<float> g;
      auto l = sum_all(tanh(matmul(g.constant(x), g.param(ps.get("w")))));
      g.backward(l);
      adam_step(ps, st, 0.01);
    }
    return ps.get("w").value.storage();
  };
  EXPECT_EQ(run(), run());
}

TEST(CosineLr, Endpoints) {
  EXPECT_DOUBLE_EQ(cosine_lr(0, 100, 1e-3, 1e-5), 1e-3);
  EXPECT_DOUBLE_EQ(cosine_lr(100, 100, 1e-3, 1e-5), 1e-5);
  EXPECT_NEAR(cosine_lr(50, 100, 1e-3, 1e-5), (1e-3 + 1e-5) / 2, 1e-15);
  EXPECT_DOUBLE_EQ(cosine_lr(150, 100, 1e-3, 1e-5), 1e-5);
}

TEST(CosineLr, MonotoneNonIncreasing) {
  double prev = cosine_lr(0, 37, 1.0, 0.1);
  for (int s = 1; s <= 40; ++s) {
    double cur = cosine_lr(s, 37, 1.0, 0.1);
    EXPECT_LE(cur, prev);
    prev = cur;
  }
}

}  // namespace
}  // namespace sswp::diff
