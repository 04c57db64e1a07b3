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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are fixed below.

#include <lpvred/io.hpp>
#include <lpvred/lpvred.hpp>
#include <lpvred/pipeline.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace lpvred;

namespace {

namespace tol {
constexpr double kExactness = 1e-10;
constexpr int kExactnessPoints = 10000;
constexpr double kRankRecovery = 1e-6;
constexpr double kRankGap = 10.0;
constexpr double kRankRuntime = 60.0;  // seconds
constexpr double kEckartYoung = 1e-8;
constexpr Eigen::Index kParafoilN = 50000;
constexpr double kMonotoneSlack = 1e-12;  // relative, for rounding only
constexpr double kMonotoneRuntime = 600.0;
constexpr double kNormalizationFactor = 2.0;
constexpr double kGradient = 1e-5;
constexpr int kGradientConfigs = 100;
constexpr double kParityFactor = 2.0;
constexpr double kParityRuntime = 900.0;
constexpr double kRk4Order = 3.9;
constexpr double kRk4OneStep = 0.9048375;
constexpr double kRk4OneStepTol = 1e-7;
constexpr double kKabsch = 1e-8;
constexpr double kMvee = 1e-6;
constexpr double kCornerSigmas = 3.0;
}  // namespace tol

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

struct Data {
  ModelPtr model;
  SampleSet train, val;
  VariationDataset ds_train, ds_val;
};

/// 40 random scenarios of 20 s; every fifth trajectory is held out for
/// validation, N training samples and N/4 validation samples are drawn.
Data make_data(ModelPtr model, Eigen::Index N, std::uint64_t seed) {
  const auto sc = random_scenarios(*model, 40, 20.0, seed);
  std::vector<Scenario> tr, va;
  for (size_t i = 0; i < sc.size(); ++i) (i % 5 == 4 ? va : tr).push_back(sc[i]);
  Data d;
  d.model = model;
  d.train = generate_dataset(*model, tr, 0.01, N, seed + 1);
  d.val = generate_dataset(*model, va, 0.01, N / 4, seed + 2);
  d.ds_train = build_variation_dataset(*model, d.train);
  d.ds_val = build_variation_dataset(*model, d.val);
  return d;
}

const Data& analytic_data() {
  static const Data d = make_data(std::make_shared<AnalyticBenchmarkModel>(), 50000, 1);
  return d;
}

const Data& parafoil_data() {
  static const Data d = make_data(std::make_shared<ParafoilModel>(), tol::kParafoilN, 1);
  return d;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TrainConfig desk_dnn(NormMode norm, int epochs) {
  const nlohmann::json j = default_config()["dnn"];
  TrainConfig c;
  c.learning_rate = j["learning_rate"];
  c.batch_size = j["batch_size"];
  c.l2 = j["l2"];
  c.patience = j["patience"];
  c.hidden = j["hidden"].get<std::vector<int>>();
  c.seed = j["seed"];
  c.epochs = epochs;
  c.norm = norm;
  return c;
}

/// Trains with early stopping on trajectories held out of the training set.
DnnReduction train_desk(const Data& d, int n, const TrainConfig& c) {
  const auto [fit, stop] = split_by_trajectory(d.train, 4);
  const auto ds_fit = build_variation_dataset(*d.model, fit);
  const auto ds_stop = build_variation_dataset(*d.model, stop);
  return train_dnn(d.model, ds_fit, fit, ds_stop, stop, n, c);
}

// 1 -----------------------------------------------------------------------
Outcome embedding_exactness() {
  Outcome o{true, ""};
  const std::vector<ModelPtr> models{std::make_shared<AnalyticBenchmarkModel>(), std::make_shared<ParafoilModel>()};
  for (const auto& m : models) {
    FullOrderEmbedding full(m);
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int k = 0; k < tol::kExactnessPoints; ++k) {
      StateSpacePoint p = m->operating_region().sample(rng);
      p.w.setZero();
      const Vec f = m->f(p);
      const LpvOutput y = evaluate_lpv(full.lpv(), full.theta_hat(p), p.x, p.u, p.w);
      worst = std::max(worst, (y.xdot - f).norm() / f.norm());
    }
    o.pass = o.pass && worst <= tol::kExactness;
    o.detail += m->id() + " max_rel=" + num(worst) + " ";
  }
  o.detail += "(tol " + num(tol::kExactness) + ", " + std::to_string(tol::kExactnessPoints) + " points each)";
  return o;
}

// 2 -----------------------------------------------------------------------
Outcome pca_rank_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const Data& d = analytic_data();
  Outcome o{true, ""};
  for (NormMode mode : {NormMode::Std, NormMode::MinMax}) {
    const PcaBasis b = fit_pca_basis(d.ds_train.Pi, fit_normalizer(d.ds_train.Pi, mode));
    const PcaReduction r1(d.model, b, d.ds_train.layout, 1), r2(d.model, b, d.ds_train.layout, 2);
    const ErrorReport e1 = evaluate_reduction(*d.model, r1, d.ds_val, d.val, to_string(mode));
    const ErrorReport e2 = evaluate_reduction(*d.model, r2, d.ds_val, d.val, to_string(mode));
    const bool ok = e2.pi().max <= tol::kRankRecovery && e2.xdot().max <= tol::kRankRecovery &&
                    e1.pi().rms >= tol::kRankGap * e2.pi().rms;
    o.pass = o.pass && ok;
    o.detail += to_string(mode) + ": n=2 max_e_pi=" + num(e2.pi().max) + " max_e_xdot=" + num(e2.xdot().max) +
                " n=1 rms_e_pi=" + num(e1.pi().rms) + "; ";
  }
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs <= tol::kRankRuntime;
  o.detail += "runtime " + num(secs) + " s";
  return o;
}

// 3 -----------------------------------------------------------------------
Outcome eckart_young() {
  const Data& d = parafoil_data();
  const Mat& P = d.ds_train.Pi;
  const PcaBasis b = fit_pca_basis(P, fit_normalizer(P, NormMode::Std));

  // Oracle: own normalization and an eigendecomposition of the Gram matrix.
  const Vec mean = P.rowwise().mean();
  Mat X = P.colwise() - mean;
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const double sd = std::sqrt(X.row(r).squaredNorm() / static_cast<double>(X.cols() - 1));
    if (sd > 1e-12 * std::max(1.0, std::abs(mean[r]))) X.row(r) /= sd;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(X * X.transpose());
  const Vec lam = es.eigenvalues().reverse().cwiseMax(0.0);
  const double total = X.squaredNorm();

  double worst = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const PcaReduction r(d.model, b, d.ds_train.layout, n);
    const Mat Xn = b.normalizer.normalize(P);
    const double err = (Xn - b.normalizer.normalize(r.reconstruct(r.project(P)))).norm();
    const double oracle = std::sqrt(std::max(0.0, total - lam.head(n).sum()));
    worst = std::max(worst, std::abs(err - oracle) / oracle);
  }
  return {worst <= tol::kEckartYoung, "max relative deviation " + num(worst) + " over n_s=1..10 (tol " +
                                          num(tol::kEckartYoung) + ", N=" + std::to_string(P.cols()) + ", rank " +
                                          std::to_string(b.numerical_rank()) + ")"};
}

// 4 -----------------------------------------------------------------------
Outcome monotonicity(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const Data& d = parafoil_data();
  Outcome o{true, ""};
  CsvTable curve{{"normalization", "n_theta_hat", "max_e_pi", "rms_e_pi", "rms_e_xdot"}, {}};
  for (NormMode mode : {NormMode::Std, NormMode::MinMax}) {
    const PcaBasis b = fit_pca_basis(d.ds_train.Pi, fit_normalizer(d.ds_train.Pi, mode));
    std::vector<std::array<double, 3>> rows;
    for (int n = 1; n <= 10; ++n) {
      const PcaReduction r(d.model, b, d.ds_train.layout, n);
      const ErrorReport e = evaluate_reduction(*d.model, r, d.ds_train, d.train, to_string(mode), "training");
      rows.push_back({e.pi().max, e.pi().rms, e.xdot().rms});
      curve.add_row({to_string(mode), std::to_string(n), fmt(e.pi().max), fmt(e.pi().rms), fmt(e.xdot().rms)});
    }
    std::vector<std::string> broken;
    const char* names[] = {"max_e_pi", "rms_e_pi", "rms_e_xdot"};
    for (size_t k = 1; k < rows.size(); ++k)
      for (size_t m = 0; m < 3; ++m)
        if (rows[k][m] > rows[k - 1][m] * (1.0 + tol::kMonotoneSlack))
          broken.push_back(std::string(names[m]) + "@" + std::to_string(k + 1));
    o.pass = o.pass && broken.empty();
    o.detail += to_string(mode) + ": rms_e_pi " + num(rows.front()[1]) + " -> " + num(rows.back()[1]);
    if (!broken.empty()) {
      o.detail += " increases at";
      for (const auto& s : broken) o.detail += " " + s;
    }
    o.detail += "; ";
  }
  write_csv(work / "monotonicity.csv", curve);
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs <= tol::kMonotoneRuntime;
  o.detail += "runtime " + num(secs) + " s, curves in monotonicity.csv";
  return o;
}

// 5 -----------------------------------------------------------------------
Outcome normalization_finding() {
  const Data& d = parafoil_data();
  const int n = 3;
  Outcome o{true, ""};
  auto judge = [&](const std::string& method, double std_rms, double mm_rms) {
    const bool ok = mm_rms <= tol::kNormalizationFactor * std_rms;
    o.pass = o.pass && ok;
    o.detail += method + " rms_e_pi std=" + num(std_rms) + " minmax=" + num(mm_rms) +
                (mm_rms <= std_rms ? " (minmax better)" : " (std better)") + "; ";
  };
  double pca_rms[2];
  int i = 0;
  for (NormMode mode : {NormMode::Std, NormMode::MinMax}) {
    const PcaReduction r = fit_pca(d.model, d.ds_train, fit_normalizer(d.ds_train.Pi, mode), n);
    pca_rms[i++] = evaluate_reduction(*d.model, r, d.ds_val, d.val, to_string(mode)).pi().rms;
  }
  judge("pca", pca_rms[0], pca_rms[1]);
  double dnn_rms[2];
  i = 0;
  for (NormMode mode : {NormMode::Std, NormMode::MinMax}) {
    const DnnReduction r = train_desk(d, n, desk_dnn(mode, 40));
    dnn_rms[i++] = evaluate_reduction(*d.model, r, d.ds_val, d.val, to_string(mode)).pi().rms;
  }
  judge("dnn", dnn_rms[0], dnn_rms[1]);
  o.detail += "n_theta_hat=3, validation, fail if minmax > " + num(tol::kNormalizationFactor) + "x std";
  return o;
}

// 6 -----------------------------------------------------------------------
Outcome gradient_check() {
  std::mt19937_64 rng(77);
  auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  double worst = 0.0;
  for (int c = 0; c < tol::kGradientConfigs; ++c) {
    MlpShape s;
    s.n_in = pick(1, 6);
    s.hidden = {8, 8};
    s.n_theta = pick(1, 4);
    s.n_out = pick(1, 6);
    s.bypass = pick(0, 1) == 1;
    MlpNetwork net(s);
    net.initialize(rng());
    const int B = pick(1, 16);
    std::normal_distribution<double> g;
    Mat X(s.n_in, B), Y(s.n_out, B);
    for (Eigen::Index k = 0; k < X.size(); ++k) X.data()[k] = g(rng);
    for (Eigen::Index k = 0; k < Y.size(); ++k) Y.data()[k] = g(rng);
    const double l2 = pick(0, 1) ? 0.0 : 1e-2;
    Vec grad;
    net.loss(X, Y, l2, &grad);
    Vec fd(net.n_params());
    for (Eigen::Index i = 0; i < net.n_params(); ++i) {
      const double keep = net.params()[i], h = 1e-6 * std::max(1.0, std::abs(keep));
      net.params()[i] = keep + h;
      const double up = net.loss(X, Y, l2);
      net.params()[i] = keep - h;
      const double dn = net.loss(X, Y, l2);
      net.params()[i] = keep;
      fd[i] = (up - dn) / (2 * h);
    }
    worst = std::max(worst, (grad - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  return {worst <= tol::kGradient, "max relative error " + num(worst) + " over " +
                                       std::to_string(tol::kGradientConfigs) + " random 2x8 tanh networks (tol " +
                                       num(tol::kGradient) + ")"};
}

// 7 -----------------------------------------------------------------------
Outcome dnn_parity() {
  const auto t0 = std::chrono::steady_clock::now();
  const Data& d = analytic_data();
  const NormMode mode = NormMode::MinMax;
  const PcaReduction pca = fit_pca(d.model, d.ds_train, fit_normalizer(d.ds_train.Pi, mode), 2);
  const double pca_rms = evaluate_reduction(*d.model, pca, d.ds_val, d.val, "minmax").pi().rms;
  const DnnReduction dnn = train_desk(d, 2, desk_dnn(mode, 200));
  const double dnn_rms = evaluate_reduction(*d.model, dnn, d.ds_val, d.val, "minmax").pi().rms;
  const double secs = seconds_since(t0);
  const bool ok = dnn_rms <= tol::kParityFactor * pca_rms && secs <= tol::kParityRuntime;
  return {ok, "n_theta_hat=2 rms_e_pi dnn=" + num(dnn_rms) + " pca=" + num(pca_rms) + " ratio=" +
                  num(dnn_rms / pca_rms) + " (limit " + num(tol::kParityFactor) + "), best epoch " +
                  std::to_string(dnn.best_epoch) + ", runtime " + num(secs) + " s"};
}

// 8 -----------------------------------------------------------------------
Outcome rk4_order() {
  AnalyticBenchmarkModel m;
  Vec x0(3);
  x0 << 0.8, -0.4, 0.3;
  const InputSignal in = InputSignal::constant(Vec::Constant(1, 0.25), Vec::Zero(0));
  auto end = [&](double h) { return integrate_rk4(m, x0, in, h, 2.0).points.back().x; };
  const Vec a = end(0.1), b = end(0.05), c = end(0.025);
  const double order = std::log2((a - b).norm() / (b - c).norm());
  const double one = rk4_step([](const Vec& x) { return Vec(-x); }, Vec::Ones(1), 0.1)[0];
  const bool ok = order >= tol::kRk4Order && std::abs(one - tol::kRk4OneStep) <= tol::kRk4OneStepTol;
  return {ok, "observed order " + num(order) + " (min " + num(tol::kRk4Order) + "), one step " +
                  std::to_string(one) + " vs 0.9048375"};
}

// 9 -----------------------------------------------------------------------
Outcome region_correctness() {
  std::ostringstream det;
  bool pass = true;

  // Planted 30 degree rotation of a 3:1 rectangle.
  const double a = std::numbers::pi / 6;
  Mat R(2, 2);
  R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat P(2, 400);
  for (Eigen::Index k = 0; k < P.cols(); ++k) P.col(k) << 3 * u(rng), u(rng);
  P.col(0) << -3, -1;
  P.col(1) << 3, 1;
  P.col(2) << 3, -1;
  P.col(3) << -3, 1;
  const Mat Q = R * P;
  const double kab = std::max((kabsch_box(Q).rotation - R).norm(), (kabsch_rotation(P, Q) - R).norm());
  pass = pass && kab <= tol::kKabsch;
  det << "kabsch 30deg error " << num(kab) << "; ";

  Mat four(2, 4);
  four << 1, -1, 0, 0, 0, 0, 1, -1;
  const Ellipsoid e = min_volume_ellipsoid(four, 1e-10);
  const double mv = std::max(e.center.norm(), (e.E - Mat::Identity(2, 2)).norm());
  pass = pass && mv <= tol::kMvee;
  det << "mvee unit-circle error " << num(mv) << "; ";

  // Containment on random clouds and on a reduced scheduling cloud.
  std::vector<Mat> clouds;
  for (int dim = 2; dim <= 3; ++dim) {
    Mat C(dim, 300);
    for (Eigen::Index k = 0; k < C.size(); ++k) C.data()[k] = u(rng) * (1 + k % dim);
    clouds.push_back(C);
  }
  const Data& d = analytic_data();
  const PcaReduction pr = fit_pca(d.model, d.ds_train, fit_normalizer(d.ds_train.Pi, NormMode::Std), 2);
  clouds.push_back(pr.project(d.ds_train.Pi));
  std::size_t total = 0, missed = 0;
  for (const Mat& C : clouds) {
    const Ellipsoid ell = min_volume_ellipsoid(C), sph = min_enclosing_sphere(C);
    const std::vector<BoxRegion> boxes{axis_aligned_box(C), kabsch_box(C), ellipsoid_to_box(ell), ellipsoid_to_box(sph)};
    for (Eigen::Index k = 0; k < C.cols(); ++k) {
      for (const auto& b : boxes) missed += b.contains(C.col(k)) ? 0 : 1;
      missed += ell.contains(C.col(k)) ? 0 : 1;
      missed += sph.contains(C.col(k)) ? 0 : 1;
      total += boxes.size() + 2;
    }
  }
  pass = pass && missed == 0;
  det << "containment " << (total - missed) << "/" << total << "; ";

  const BoxRegion box = BoxRegion::axis_aligned(Vec::Constant(3, -1.0), Vec::Constant(3, 2.0));
  ConservatismOptions co;
  co.samples = 200000;
  const ConservatismResult cr = conservatism_ratio(box.corners(), box, co);
  const bool corner_ok = cr.ratio <= tol::kCornerSigmas * cr.std_error + 1e-15;
  pass = pass && corner_ok;
  det << "corner ratio " << num(cr.ratio) << " (3 SE = " << num(3 * cr.std_error) << ")";
  return {pass, det.str()};
}

// 10 ----------------------------------------------------------------------
Outcome open_loop(const fs::path& work) {
  std::ostringstream det;
  bool pass = true;
  const Data& d = parafoil_data();
  const auto& model = *d.model;
  const double T = 20.0, h = 0.01;
  const InputSignal in = maneuver(model, "s_turn", T);
  const Vec x0 = model.reference_point().x;

  // Integrator tolerance: step-halving estimate of the RK4 error itself.
  const Trajectory coarse = integrate_rk4(model, x0, in, h, T), fine = integrate_rk4(model, x0, in, h / 2, T);
  double integ = 0.0;
  for (size_t k = 0; k < coarse.points.size(); ++k)
    integ = std::max(integ, (coarse.points[k].x - fine.points[2 * k].x).norm());

  FullOrderEmbedding full(d.model);
  const PcaBasis b = fit_pca_basis(d.ds_train.Pi, fit_normalizer(d.ds_train.Pi, NormMode::Std));
  std::vector<std::unique_ptr<PcaReduction>> reds;
  std::vector<const ReducedScheduling*> ptrs{&full};
  std::vector<std::string> labels{"full"};
  for (int n : {3, 5, 10}) {
    reds.push_back(std::make_unique<PcaReduction>(d.model, b, d.ds_train.layout, n));
    ptrs.push_back(reds.back().get());
    labels.push_back("pca_n" + std::to_string(n));
  }
  const TrajectoryComparison cmp = compare_trajectories(model, ptrs, labels, x0, in, h, T);
  write_json(work / "open_loop_summary.json", cmp.summary());
  const bool full_ok = !cmp.reduced[0].diverged && cmp.max_error[0] <= integ;
  pass = pass && full_ok;
  det << "full deviation " << num(cmp.max_error[0]) << " vs RK4 error estimate " << num(integ) << "; drift at t=";
  for (double hz : cmp.horizons) det << hz << ",";
  det << " s:";
  for (size_t m = 1; m < cmp.reduced.size(); ++m) {
    det << " " << labels[m] << "[";
    for (size_t k = 0; k < cmp.drift[m].size(); ++k) {
      det << (k ? " " : "") << num(cmp.drift[m][k]);
      pass = pass && std::isfinite(cmp.drift[m][k]);
    }
    det << "]";
    pass = pass && !cmp.reduced[m].diverged;
  }
  return {pass, det.str()};
}

// 11 ----------------------------------------------------------------------
Outcome determinism(const fs::path& work) {
  const nlohmann::json cfg = parse_toml(R"(
[simulation]
T = 5.0
scenarios = 10
[dataset]
N = 2000
exactness_points = 500
[pca]
nhat = [1, 2, 3]
[dnn]
enabled = true
nhat = [2]
hidden = [16, 16]
epochs = 5
[region]
mc_samples = 20000
[compare]
nhat = [2, 3]
T = 5.0
[run]
deterministic = true
)");
  fs::remove_all(work / "det_a");
  fs::remove_all(work / "det_b");
  run_pipeline(cfg, work / "det_a");
  run_pipeline(cfg, work / "det_b");
  const std::string a = detail::read_file(work / "det_a/manifest.json");
  const std::string b = detail::read_file(work / "det_b/manifest.json");
  const auto n = read_json(work / "det_a/manifest.json")["artifacts"].size();
  return {a == b && n > 0, std::string(a == b ? "identical" : "different") + " manifests (" + std::to_string(a.size()) +
                               " bytes, " + std::to_string(n) + " artifacts)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lpvred acceptance checks"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work-dir", work, "Scratch directory for artifacts");
  app.add_option("--only", only, "Run only these criterion numbers")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);
  set_warnings_enabled(false);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"embedding exactness", embedding_exactness},
      {"PCA rank recovery", pca_rank_recovery},
      {"Eckart-Young consistency", eckart_young},
      {"monotonicity sweep", [&] { return monotonicity(work); }},
      {"normalization finding", normalization_finding},
      {"DNN gradient check", gradient_check},
      {"DNN parity", dnn_parity},
      {"RK4 order", rk4_order},
      {"region correctness", region_correctness},
      {"open-loop trajectories", [&] { return open_loop(work); }},
      {"determinism", [&] { return determinism(work); }},
  };
  int failed = 0;
  nlohmann::json report = nlohmann::json::array();
  for (size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << checks[i].first << ": " << o.detail << " ["
              << num(secs) << " s]" << std::endl;
    report.push_back({{"id", id}, {"name", checks[i].first}, {"pass", o.pass}, {"detail", o.detail}, {"seconds", secs}});
  }
  write_json(fs::path(work) / "acceptance.json", report);
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
