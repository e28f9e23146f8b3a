// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rnb/netgraph.hpp"

namespace rnb {
namespace {

using testing::dense;
using testing::random_tensor;
using testing::relu;

/// Central finite difference of `loss` w.r.t. every stored parameter.
Gradients numeric_gradients(const NetworkDesc& net, const WeightStore& w,
                            const std::function<double(const WeightStore&)>& loss, double eps = 1e-4) {
  Gradients out;
  for (const auto& [name, entry] : w.entries()) {
    Tensor base = w.tensor(name);
    Tensor g = Tensor::zeros(base.shape());
    for (std::size_t i = 0; i < base.size(); ++i) {
      WeightStore plus = w, minus = w;
      Tensor tp = base, tm = base;
      tp[i] += eps;
      tm[i] -= eps;
      plus.set(name, tp);
      minus.set(name, tm);
      g[i] = (loss(plus) - loss(minus)) / (2 * eps);
    }
    out.emplace(name, g);
  }
  (void)net;
  return out;
}

double max_rel_error(const Gradients& a, const Gradients& b) {
  double worst = 0;
  for (const auto& [name, ga] : a) {
    const Tensor& gb = b.at(name);
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double denom = std::max({std::abs(ga[i]), std::abs(gb[i]), 1e-6});
      worst = std::max(worst, std::abs(ga[i] - gb[i]) / denom);
    }
  }
  return worst;
}

TEST(Backward, DenseQuadraticClosedForm) {
  NetworkDesc net;
  net.input_shape = {3};
  net.blocks.push_back({"b1", {dense("fc", 3, 2)}});
  WeightStore w;
  const Tensor W = random_tensor({2, 3}, 1), x = random_tensor({3}, 2), t = random_tensor({2}, 3);
  w.set("fc.weight", W);
  ForwardCache cache;
  const Tensor y = forward_float(net, w, x, &cache);
  const LossValue l = mse_loss(y, t);
  const Gradients g = backward(net, w, cache, l.grad);
  // d/dW mean((Wx - t)^2) = (2/n) (Wx - t) x^T
  for (std::size_t o = 0; o < 2; ++o)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_NEAR(g.at("fc.weight")(o, j), (2.0 / 2.0) * (y[o] - t[o]) * x[j], 1e-15);
}

TEST(Backward, SharedGradientIsSumOverUses) {
  NetworkDesc shared;
  shared.input_shape = {6};
  shared.blocks.push_back({"b1", {dense("a", 6, 6), relu("r"), dense("b", 6, 6)}});
  shared.reuse.push_back({"a", {"a", "b"}, Granularity::layer_wise,
                          {ObuTransform::identity(), ObuTransform::channel_shuffle(2)}});

  const Tensor W = random_tensor({6, 6}, 4), x = random_tensor({6}, 5), t = random_tensor({6}, 6);
  WeightStore ws;
  ws.set("a.weight", W);
  ForwardCache cs;
  const Gradients gs = backward(shared, ws, cs, mse_loss(forward_float(shared, ws, x, &cs), t).grad);

  // Independent copies with the shuffle moved into an explicit reuse-free
  // form: b keeps its own weights, equal to a's.
  NetworkDesc split;
  split.input_shape = {6};
  split.blocks.push_back({"b1", {dense("a", 6, 6), relu("r"), dense("b", 6, 6)}});
  split.reuse.push_back({"b", {"b"}, Granularity::layer_wise, {ObuTransform::channel_shuffle(2)}});
  WeightStore wu;
  wu.set("a.weight", W);
  wu.set("b.weight", W);
  ForwardCache cu;
  const Tensor yu = forward_float(split, wu, x, &cu);
  EXPECT_EQ(yu, forward_float(shared, ws, x));
  const Gradients gu = backward(split, wu, cu, mse_loss(yu, t).grad);
  const Tensor& ga = gu.at("a.weight");
  const Tensor& gb = gu.at("b.weight");
  for (std::size_t i = 0; i < W.size(); ++i) EXPECT_NEAR(gs.at("a.weight")[i], ga[i] + gb[i], 1e-14);
}

TEST(Backward, FiniteDifferenceThreeLayerShared) {
  NetworkDesc net;
  net.input_shape = {5};
  net.blocks.push_back({"b1", {dense("fc1", 5, 7), relu("r1"), dense("fc2", 7, 5), relu("r2"), dense("fc3", 5, 7),
                              testing::norm("n", 7, 0.8, 0.1)}});
  net.reuse.push_back({"fc1", {"fc1", "fc2", "fc3"}, Granularity::layer_wise,
                       {ObuTransform::identity(), ObuTransform::transpose(), ObuTransform::flattened_shuffle(1, 9)}});
  WeightStore w = init_weights(net, 7);
  const Tensor x = random_tensor({5}, 8);
  auto loss = [&](const WeightStore& ws) { return softmax_cross_entropy(forward_float(net, ws, x), 3).loss; };
  ForwardCache cache;
  const Gradients g = backward(net, w, cache, softmax_cross_entropy(forward_float(net, w, x, &cache), 3).grad);
  EXPECT_EQ(g.size(), 3u);  // fc1.weight, n.scale, n.offset
  EXPECT_LT(max_rel_error(g, numeric_gradients(net, w, loss)), 1e-4);
}

TEST(Backward, ConvFiniteDifference) {
  NetworkDesc net;
  net.input_shape = {2, 5, 5};
  net.blocks.push_back({"b1", {testing::conv("c1", 2, 2, 3, 1, 1), relu("r"), testing::conv("c2", 2, 2, 3, 1, 1),
                              dense("head", 50, 3)}});
  net.reuse.push_back({"c1", {"c1", "c2"}, Granularity::layer_wise,
                       {ObuTransform::identity(), ObuTransform::transpose()}});
  WeightStore w = init_weights(net, 3);
  const Tensor x = random_tensor({2, 5, 5}, 4);
  auto loss = [&](const WeightStore& ws) { return softmax_cross_entropy(forward_float(net, ws, x), 1).loss; };
  ForwardCache cache;
  const Gradients g = backward(net, w, cache, softmax_cross_entropy(forward_float(net, w, x, &cache), 1).grad);
  EXPECT_LT(max_rel_error(g, numeric_gradients(net, w, loss)), 1e-4);
}

NetworkDesc mlp(std::size_t dim, std::size_t hidden, bool shared) {
  NetworkDesc net;
  net.name = shared ? "mlp-shared" : "mlp";
  net.input_shape = {dim};
  net.blocks.push_back({"b1", {dense("in", dim, hidden), relu("r0")}});
  net.blocks.push_back({"b2", {dense("h1", hidden, hidden), relu("r1")}});
  net.blocks.push_back({"b3", {dense("h2", hidden, hidden), relu("r2")}});
  net.blocks.push_back({"b4", {dense("out", hidden, 2)}});
  if (shared) {
    net.reuse.push_back({"b2", {"b2", "b3"}, Granularity::block_wise,
                         {ObuTransform::identity(), ObuTransform::channel_shuffle(4)}});
  }
  return net;
}

TEST(ToyTrain, BlobsBaselineAndSharedRetention) {
  const Dataset train = make_blobs(400, 8, 1);
  TrainConfig cfg;
  cfg.lr = 0.01;
  cfg.epochs = 20;
  cfg.seed = 3;
  const TrainResult base = toy_train(mlp(8, 16, false), train, cfg);
  const TrainResult tied = toy_train(mlp(8, 16, true), train, cfg);
  const double a = evaluate(mlp(8, 16, false), base.weights, train);
  const double b = evaluate(mlp(8, 16, true), tied.weights, train);
  EXPECT_GE(a, 0.98);
  EXPECT_GE(b, a - 0.02);
  EXPECT_LT(parameter_count(mlp(8, 16, true)), parameter_count(mlp(8, 16, false)));
  EXPECT_EQ(base.history.size(), 20u);
  EXPECT_LT(base.history.back().loss, base.history.front().loss);
}

TEST(ToyTrain, ZeroEpochsKeepsInitialWeights) {
  const NetworkDesc net = mlp(4, 8, false);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 11;
  const TrainResult r = toy_train(net, make_blobs(20, 4, 2), cfg);
  const WeightStore init = init_weights(net, 11);
  for (const auto& [name, e] : init.entries()) EXPECT_EQ(r.weights.tensor(name), init.tensor(name));
  EXPECT_TRUE(r.history.empty());
}

TEST(ToyTrain, DeterministicWeights) {
  const NetworkDesc net = mlp(4, 8, true);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 5;
  const Dataset d = make_blobs(64, 4, 9);
  std::ostringstream a, b;
  write_weights(a, toy_train(net, d, cfg).weights);
  write_weights(b, toy_train(net, d, cfg).weights);
  EXPECT_EQ(a.str(), b.str());
}

TEST(ToyTrain, DivergenceReportsEpoch) {
  const NetworkDesc net = mlp(4, 8, false);
  TrainConfig cfg;
  cfg.lr = 1e305;
  cfg.epochs = 5;
  cfg.weight_decay = 0;
  cfg.cosine = false;
  try {
    toy_train(net, make_blobs(64, 4, 1, 3.0, 1.0), cfg);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::training);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Evaluate, MemorizationAndChance) {
  // A fixed linear separator memorizes its own labels.
  NetworkDesc net;
  net.input_shape = {2};
  net.blocks.push_back({"b1", {dense("fc", 2, 2)}});
  WeightStore w;
  w.set("fc.weight", Tensor::matrix({{-1, 0}, {1, 0}}));
  Dataset d;
  for (int i = 0; i < 10; ++i) {
    const double v = i % 2 ? 1.0 + i : -1.0 - i;
    d.inputs.push_back(Tensor::vector({v, 0.3}));
    d.labels.push_back(i % 2);
  }
  EXPECT_EQ(evaluate(net, w, d), 1.0);

  const Dataset rnd = make_random_labels(1000, 8, 2, 4);
  const NetworkDesc untrained = mlp(8, 16, false);
  const double acc = evaluate(untrained, init_weights(untrained, 8), rnd);
  EXPECT_NEAR(acc, 0.5, 0.1);
}

TEST(Evaluate, PhotonicWithinTwoPointsOfFloat) {
  const NetworkDesc net = mlp(8, 16, true);
  const Dataset train = make_blobs(400, 8, 1);
  TrainConfig cfg;
  cfg.lr = 0.01;
  cfg.epochs = 10;
  cfg.seed = 3;
  const TrainResult r = toy_train(net, train, cfg);
  PhotonicEngine e(net, r.weights, CalibrationCurve::identity(), {});
  e.program();
  EXPECT_LE(std::abs(evaluate(e, train) - evaluate(net, r.weights, train)), 0.02);
}

TEST(Dataset, IdxRoundTrip) {
  const std::string img = ::testing::TempDir() + "/imgs.idx", lab = ::testing::TempDir() + "/labs.idx";
  {
    std::ofstream i(img, std::ios::binary), l(lab, std::ios::binary);
    const unsigned char ih[] = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2};
    i.write(reinterpret_cast<const char*>(ih), sizeof ih);
    const unsigned char px[] = {0, 255, 51, 102, 255, 255, 0, 0};
    i.write(reinterpret_cast<const char*>(px), sizeof px);
    const unsigned char lh[] = {0, 0, 8, 1, 0, 0, 0, 2, 7, 3};
    l.write(reinterpret_cast<const char*>(lh), sizeof lh);
  }
  const Dataset d = load_idx(img, lab);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.sample_shape, (Shape{2, 2}));
  EXPECT_DOUBLE_EQ(d.inputs[0][1], 1.0);
  EXPECT_DOUBLE_EQ(d.inputs[0][2], 0.2);
  EXPECT_EQ(d.labels, (std::vector<std::size_t>{7, 3}));
  EXPECT_EQ(load_idx(img, lab, 1).size(), 1u);
  EXPECT_THROW(load_idx("/nonexistent", lab), Error);
}

TEST(Dataset, BlobsAreDeterministic) {
  const Dataset a = make_blobs(10, 3, 42), b = make_blobs(10, 3, 42);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.inputs[i], b.inputs[i]);
  EXPECT_EQ(a.labels[0], 0u);
  EXPECT_EQ(a.labels[1], 1u);
}

}  // namespace
}  // namespace rnb
