// Copyright 2026 The lpvred Authors
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

#include <lpvred/dnn.hpp>
#include <lpvred/metrics.hpp>
#include <lpvred/models/analytic_benchmark.hpp>
#include <lpvred/models/parafoil.hpp>
#include <lpvred/pca.hpp>

#include <gtest/gtest.h>

#include <memory>
#include <random>

namespace lpvred {
namespace {

struct AnalyticData {
  std::shared_ptr<AnalyticBenchmarkModel> model = std::make_shared<AnalyticBenchmarkModel>();
  SampleSet train, val;
  VariationDataset ds_train, ds_val;

  AnalyticData() {
    const SampleSet all = generate_dataset(*model, random_scenarios(*model, 10, 5.0, 1), 0.01, 2000, 2);
    std::tie(train, val) = split_by_trajectory(all, 5);
    ds_train = build_variation_dataset(*model, train);
    ds_val = build_variation_dataset(*model, val);
  }
};

const AnalyticData& analytic() {
  static const AnalyticData d;
  return d;
}

Mat random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
  return m;
}

TEST(Normalizer, StdUsesSampleDeviation) {
  Mat P(2, 4);
  P << 1, 2, 3, 4,  //
      5, 5, 5, 5;
  const Normalizer n = fit_normalizer(P, NormMode::Std);
  EXPECT_DOUBLE_EQ(n.center[0], 2.5);
  EXPECT_NEAR(n.scale[0], 1.0 / std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(n.scale[1], 1.0);
  EXPECT_EQ(n.normalize(P).row(1).norm(), 0.0);
  EXPECT_LE((n.denormalize(n.normalize(P)) - P).norm(), 1e-14);
}

TEST(Normalizer, MinMaxScale) {
  Mat P(1, 3);
  P << -1, 0, 3;
  const Normalizer n = fit_normalizer(P, NormMode::MinMax);
  EXPECT_DOUBLE_EQ(n.scale[0], 0.25);
  EXPECT_NEAR(n.center[0], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(norm_mode_from_string("minmax"), NormMode::MinMax);
  const Mat Q = random_matrix(4, 500, 11);
  const Mat Qn = fit_normalizer(Q, NormMode::MinMax).normalize(Q);
  EXPECT_LE(Qn.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_LE(Qn.rowwise().mean().norm(), 1e-14);
  EXPECT_THROW(norm_mode_from_string("zscore"), Error);
  EXPECT_THROW(fit_normalizer(Mat(1, 1), NormMode::Std), Error);
}

TEST(Pca, SignConvention) {
  Mat U(3, 2);
  U << 0.1, 0.2,  //
      -0.9, 0.3,  //
      0.2, -0.8;
  fix_signs(U);
  EXPECT_GT(U(1, 0), 0.0);
  EXPECT_GT(U(2, 1), 0.0);
}

TEST(Pca, SpectrumMatchesIndependentSvd) {
  const Mat P = random_matrix(6, 300, 3) + 4.0 * Mat::Ones(6, 300);
  const Normalizer n = fit_normalizer(P, NormMode::Std);
  const PcaBasis b = fit_pca_basis(P, n);
  Eigen::JacobiSVD<Mat> svd(n.normalize(P));
  EXPECT_LE((b.sigma - svd.singularValues()).norm(), 1e-10 * b.sigma[0]);
  EXPECT_LE((b.U.transpose() * b.U - Mat::Identity(6, 6)).norm(), 1e-12);
  const auto sp = spectrum(b);
  EXPECT_NEAR(sp.back().energy, 1.0, 1e-15);
  for (size_t i = 1; i < sp.size(); ++i) EXPECT_GE(sp[i].energy, sp[i - 1].energy);
}

TEST(Pca, GramRouteAgreesWithSvd) {
  const Mat low = random_matrix(5, 2, 4) * random_matrix(2, kGramThreshold + 10, 5);
  const Normalizer n = fit_normalizer(low, NormMode::Std);
  const PcaBasis g = fit_pca_basis(low, n);
  ASSERT_TRUE(g.gram);
  Eigen::BDCSVD<Mat> svd(n.normalize(low), Eigen::ComputeThinU);
  EXPECT_NEAR(g.sigma[0], svd.singularValues()[0], 1e-8 * g.sigma[0]);
  EXPECT_NEAR(g.sigma[1], svd.singularValues()[1], 1e-8 * g.sigma[0]);
  EXPECT_EQ(g.numerical_rank(), 2);
  Mat U2 = svd.matrixU().leftCols(2);
  fix_signs(U2);
  EXPECT_LE((g.U.leftCols(2) - U2).norm(), 1e-6);
}

TEST(Pca, AnalyticRankIsTwo) {
  const auto& d = analytic();
  for (NormMode mode : {NormMode::Std, NormMode::MinMax}) {
    const PcaBasis b = fit_pca_basis(d.ds_train.Pi, fit_normalizer(d.ds_train.Pi, mode));
    EXPECT_EQ(b.numerical_rank(), 2);
    const PcaReduction r(d.model, b, d.ds_train.layout, 2);
    const Mat rec = r.reconstruct(r.project(d.ds_val.Pi));
    EXPECT_LE((rec - d.ds_val.Pi).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Pca, EckartYoungOnTrainingData) {
  const auto& d = analytic();
  const Mat P = d.ds_train.Pi + 1e-3 * random_matrix(d.ds_train.n_pi(), d.ds_train.n_samples(), 9);
  const Normalizer n = fit_normalizer(P, NormMode::Std);
  const PcaBasis b = fit_pca_basis(P, n);
  for (int k = 1; k <= 6; ++k) {
    const PcaReduction r(d.model, b, d.ds_train.layout, k);
    const double err = (n.normalize(r.reconstruct(r.project(P))) - n.normalize(P)).norm();
    EXPECT_NEAR(err, b.sigma.tail(b.sigma.size() - k).norm(), 1e-8 * b.sigma[0]);
  }
}

TEST(Pca, AffineModelMatchesReconstruction) {
  const auto& d = analytic();
  const PcaReduction r = fit_pca(d.model, d.ds_train, fit_normalizer(d.ds_train.Pi, NormMode::MinMax), 2);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    StateSpacePoint p = d.model->operating_region().sample(rng);
    const Mat G = unvec_gamma(r.gamma_hat(p), r.layout());
    const Mat M = r.lpv().matrix(r.theta_hat(p));
    EXPECT_LE((M.topLeftCorner(3, 4) - G).norm(), 1e-12);
    EXPECT_LE((M.bottomLeftCorner(3, 3) - Mat::Identity(3, 3)).norm(), 0.0);
    EXPECT_LE((reduced_derivative(r, p) - factorized_derivative(*d.model, p)).norm(), 1e-12);
  }
  EXPECT_THROW(PcaReduction(d.model, fit_pca_basis(d.ds_train.Pi, Normalizer::identity(12)), d.ds_train.layout, 13),
               Error);
}

TEST(Pca, StateInputLayoutDropsWind) {
  auto model = std::make_shared<ParafoilModel>();
  const SampleSet s = generate_dataset(*model, random_scenarios(*model, 4, 10.0, 1), 0.05, 400, 2);
  const VariationDataset ds = build_variation_dataset(*model, s);
  EXPECT_EQ(ds.n_pi(), 12 * 14);
  const PcaReduction r = fit_pca(model, ds, fit_normalizer(ds.Pi, NormMode::Std), 3);
  EXPECT_EQ(r.lpv().M0.block(0, 14, 12, 3).norm(), 0.0);
  for (const auto& Mi : r.lpv().Mi) EXPECT_EQ(Mi.block(0, 14, 12, 3).norm(), 0.0);
}

TEST(Features, AngularBlock) {
  Vec x(4), u(1);
  x << 1, 0.5, 2, -0.25;
  u << 9;
  const Vec f = feature_map({1, 3}, x, u);
  ASSERT_EQ(f.size(), 7);
  EXPECT_EQ(f[0], 1.0);
  EXPECT_DOUBLE_EQ(f[1], std::sin(0.5));
  EXPECT_DOUBLE_EQ(f[2], std::sin(-0.25));
  EXPECT_DOUBLE_EQ(f[3], std::cos(0.5));
  EXPECT_DOUBLE_EQ(f[4], std::cos(-0.25));
  EXPECT_EQ(f[5], 2.0);
  EXPECT_EQ(f[6], 9.0);
  EXPECT_THROW(feature_map({4}, x, u), DimensionError);
  ParafoilModel m;
  EXPECT_EQ(feature_dim(m), 17);
}

double gradient_error(const MlpShape& shape, std::uint64_t seed, double l2) {
  MlpNetwork net(shape);
  net.initialize(seed);
  const Mat X = random_matrix(shape.n_in, 5, seed + 1), Y = random_matrix(shape.n_out, 5, seed + 2);
  Vec g;
  net.loss(X, Y, l2, &g);
  Vec fd(net.n_params());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < net.n_params(); ++i) {
    const double keep = net.params()[i];
    net.params()[i] = keep + h;
    const double up = net.loss(X, Y, l2);
    net.params()[i] = keep - h;
    const double dn = net.loss(X, Y, l2);
    net.params()[i] = keep;
    fd[i] = (up - dn) / (2 * h);
  }
  return (g - fd).norm() / std::max(1e-12, fd.norm());
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  MlpShape s{3, {8, 8}, 2, 4, false, Activation::Tanh};
  EXPECT_LE(gradient_error(s, 1, 0.0), 1e-6);
  EXPECT_LE(gradient_error(s, 2, 0.1), 1e-6);
  s.bypass = true;
  EXPECT_LE(gradient_error(s, 3, 0.01), 1e-6);
  s.activation = Activation::Identity;
  s.hidden = {};
  EXPECT_LE(gradient_error(s, 4, 0.01), 1e-6);
}

TEST(Mlp, ParameterLayout) {
  MlpShape s{3, {5}, 2, 4, true, Activation::Tanh};
  MlpNetwork net(s);
  EXPECT_EQ(net.n_params(), 5 * 3 + 5 + 2 * 5 + 2 + 4 * 2 + 4 + 4 * 3);
  net.initialize(7);
  EXPECT_EQ(net.b(0).norm(), 0.0);
  EXPECT_LE(net.W(0).cwiseAbs().maxCoeff(), std::sqrt(6.0 / 8.0));
  const Mat X = random_matrix(3, 4, 1);
  const Mat th = net.encode(X);
  EXPECT_LE(th.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_LE((net.predict(X) - net.decode(th) - net.W_bypass() * X).norm(), 1e-13);
  EXPECT_THROW(net.forward(Mat::Zero(2, 1)), DimensionError);
  EXPECT_THROW(MlpNetwork(MlpShape{0, {}, 1, 1}), Error);
  MlpNetwork plain(MlpShape{3, {5}, 2, 4});
  EXPECT_THROW(plain.W_bypass(), Error);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  Vec p = Vec::Zero(3), g(3);
  g << 2.0, -0.5, 1e-3;
  AdamState st;
  adam_step(p, g, st, AdamParams{0.1});
  EXPECT_NEAR(p[0], -0.1, 1e-7);
  EXPECT_NEAR(p[1], 0.1, 1e-7);
  EXPECT_NEAR(p[2], -0.1, 1e-4);
  EXPECT_EQ(st.t, 1);
}

TEST(Adam, MinimizesQuadratic) {
  Vec p = Vec::Constant(2, 3.0);
  AdamState st;
  for (int k = 0; k < 3000; ++k) adam_step(p, Vec(2.0 * p), st, AdamParams{0.01});
  EXPECT_LE(p.norm(), 1e-2);
}

TrainConfig small_config() {
  TrainConfig c;
  c.learning_rate = 3e-3;
  c.epochs = 30;
  c.batch_size = 64;
  c.hidden = {16, 16};
  c.l2 = 1e-6;
  c.patience = 30;
  c.norm = NormMode::MinMax;
  return c;
}

TEST(Dnn, TrainingReducesLossAndIsDeterministic) {
  const auto& d = analytic();
  const TrainConfig c = small_config();
  const DnnReduction a = train_dnn(d.model, d.ds_train, d.train, d.ds_val, d.val, 2, c);
  ASSERT_GE(a.curve.size(), 2u);
  EXPECT_EQ(a.curve.front().epoch, 0);
  EXPECT_LT(a.curve[static_cast<size_t>(a.best_epoch)].val_loss, 0.1 * a.curve.front().val_loss);
  const DnnReduction b = train_dnn(d.model, d.ds_train, d.train, d.ds_val, d.val, 2, c);
  EXPECT_EQ(a.network().params(), b.network().params());
  EXPECT_EQ(a.varying_rows(), d.ds_train.varying_rows);
}

TEST(Dnn, ReductionInterfaces) {
  const auto& d = analytic();
  TrainConfig c = small_config();
  c.epochs = 3;
  c.bypass = true;
  const DnnReduction r = train_dnn(d.model, d.ds_train, d.train, d.ds_val, d.val, 2, c);
  const StateSpacePoint p = d.val.point(3);
  const Vec g = r.gamma_hat(p);
  ASSERT_EQ(g.size(), 12);
  const Mat batch = r.gamma_batch(select_columns(d.val, {3}));
  EXPECT_LE((batch.col(0) - g).norm(), 1e-12);
  for (Eigen::Index i = 0; i < 12; ++i) {
    if (std::find(r.varying_rows().begin(), r.varying_rows().end(), i) == r.varying_rows().end()) {
      EXPECT_EQ(g[i], d.ds_train.Pi(i, 0));
    }
  }
  // The exported affine model drops the bypass term.
  const Vec th = r.theta_hat(p);
  const Vec no_bypass = r.expand(r.network().decode(th)).col(0);
  EXPECT_LE((r.lpv().matrix(th).topLeftCorner(3, 4) - unvec_gamma(no_bypass, r.layout())).norm(), 1e-12);
  c.learning_rate = 0;
  EXPECT_THROW(train_dnn(d.model, d.ds_train, d.train, d.ds_val, d.val, 2, c), Error);
}

TEST(Dnn, DivergentTrainingIsReported) {
  const auto& d = analytic();
  TrainConfig c = small_config();
  c.learning_rate = 1e300;
  c.epochs = 5;
  EXPECT_THROW(train_dnn(d.model, d.ds_train, d.train, d.ds_val, d.val, 2, c), Error);
}

TEST(Metrics, RowErrors) {
  Mat Y(3, 2), Yh(3, 2);
  Y << 1, -2,  //
      0, 0,    //
      3, 4;
  Yh << 1, -1,  //
      0.5, 0,   //
      3, 4;
  const RowErrors e = row_errors(Y, Yh);
  EXPECT_DOUBLE_EQ(e.values[0], 0.5);
  EXPECT_DOUBLE_EQ(e.values[1], 0.5);
  EXPECT_EQ(e.values[2], 0.0);
  ASSERT_EQ(e.flagged.size(), 1u);
  EXPECT_EQ(e.flagged[0], 1);
  EXPECT_THROW(row_errors(Y, Mat(2, 2)), DimensionError);
}

TEST(Metrics, Aggregates) {
  Vec a(4);
  a << 1, 2, 2, 4;
  EXPECT_EQ(aggregate(a).max, 4.0);
  EXPECT_DOUBLE_EQ(aggregate(a).rms, 5.0);
  EXPECT_DOUBLE_EQ(aggregate(a, true).rms, 2.5);
  EXPECT_THROW(aggregate(Vec()), Error);
}

TEST(Metrics, EvaluateAnalyticPca) {
  const auto& d = analytic();
  const PcaReduction r2 = fit_pca(d.model, d.ds_train, fit_normalizer(d.ds_train.Pi, NormMode::Std), 2);
  const PcaReduction r1 = fit_pca(d.model, d.ds_train, fit_normalizer(d.ds_train.Pi, NormMode::Std), 1);
  const ErrorReport e2 = evaluate_reduction(*d.model, r2, d.ds_val, d.val, "std");
  const ErrorReport e1 = evaluate_reduction(*d.model, r1, d.ds_val, d.val, "std");
  EXPECT_LE(e2.pi().max, 1e-10);
  EXPECT_LE(e2.xdot().max, 1e-10);
  EXPECT_GE(e1.pi().rms, 10 * e2.pi().rms);
  EXPECT_EQ(e2.samples, d.ds_val.n_samples());
  const std::string rows = error_csv_rows(e2);
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 4);
  EXPECT_EQ(rows.substr(0, 10), "pca,std,2,");
  EXPECT_EQ(e2.to_json()["n_theta_hat"], 2);
}

TEST(Metrics, FullEmbeddingTrajectoryMatches) {
  auto model = std::make_shared<ParafoilModel>();
  FullOrderEmbedding full(model);
  const InputSignal in = maneuver(*model, "s_turn", 10.0);
  const TrajectoryComparison c =
      compare_trajectories(*model, {&full}, {"full"}, model->reference_point().x, in, 0.01, 10.0);
  ASSERT_EQ(c.max_error.size(), 1u);
  EXPECT_LE(c.max_error[0], 1e-10 * c.reference.points.back().x.norm());
  EXPECT_EQ(c.horizons.size(), 4u);
  EXPECT_EQ(c.summary()["models"][0]["label"], "full");
}

}  // namespace
}  // namespace lpvred
