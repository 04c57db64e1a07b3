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

#include <lpvred/io.hpp>
#include <lpvred/models/analytic_benchmark.hpp>
#include <lpvred/pipeline.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

namespace fs = std::filesystem;

namespace lpvred {
namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lpvred_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// A configuration that runs every stage on the analytic model in seconds.
nlohmann::json small_config() {
  return parse_toml(R"(
[simulation]
T = 4.0
scenarios = 10
[dataset]
N = 1500
exactness_points = 200
[pca]
nhat = [1, 2, 3]
[region]
mc_samples = 4000
[compare]
nhat = [2, 3]
T = 2.0
)");
}

struct Command {
  int status = -1;
  std::string output;
};

Command run_cli(const std::string& args) {
  Command c;
  const std::string cmd = std::string(LPVRED_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return c;
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) c.output += buf.data();
  const int st = pclose(pipe);
  c.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return c;
}

TEST(Container, RoundTrip) {
  Container c;
  c.meta = {{"kind", "test"}, {"x", 3}};
  Mat m(2, 3);
  m << 1, 2, 3, 4, 5, 6.25;
  c.add("m", m);
  c.add("empty", Mat(0, 4));
  const std::string bytes = encode_container(c);
  EXPECT_EQ(bytes.substr(0, 4), "LPVC");
  const Container d = decode_container(bytes);
  EXPECT_EQ(d.meta["x"], 3);
  EXPECT_EQ(d.get("m"), m);
  EXPECT_EQ(d.get("empty").cols(), 4);
  EXPECT_FALSE(d.has("other"));
  EXPECT_THROW(d.get("other"), IoError);
}

TEST(Container, RejectsCorruption) {
  Container c;
  c.add("m", Mat::Ones(2, 2));
  const std::string bytes = encode_container(c);
  EXPECT_THROW(decode_container("XPVC" + bytes.substr(4)), IoError);
  EXPECT_THROW(decode_container(bytes + "x"), IoError);
  EXPECT_THROW(decode_container(bytes.substr(0, bytes.size() - 1)), IoError);
  EXPECT_THROW(decode_container(bytes.substr(0, 6)), IoError);
  EXPECT_THROW(read_container("/nonexistent/file.lpvc"), IoError);
}

TEST(Csv, RoundTripsDoubles) {
  const fs::path dir = scratch("csv");
  CsvTable t{{"a", "b"}, {}};
  const double v = 0.1 + 0.2;
  t.add_row({"x", fmt(v)});
  write_csv(dir / "t.csv", t);
  const CsvTable r = read_csv(dir / "t.csv");
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(std::stod(r.rows[0][static_cast<size_t>(r.column("b"))]), v);
  EXPECT_THROW(r.column("c"), Error);
  EXPECT_THROW(t.add_row({"only one"}), Error);
}

TEST(Serialization, SamplesVariationAndLpv) {
  auto model = std::make_shared<AnalyticBenchmarkModel>();
  const SampleSet s = generate_dataset(*model, random_scenarios(*model, 3, 2.0, 1), 0.01, 200, 2);
  const SampleSet s2 = decode_samples(encode_samples(s));
  EXPECT_EQ(s2.X, s.X);
  EXPECT_EQ(s2.trajectory, s.trajectory);
  EXPECT_EQ(s2.in_region, s.in_region);
  EXPECT_EQ(s2.model_id, "analytic");

  const VariationDataset ds = build_variation_dataset(*model, s);
  const VariationDataset ds2 = decode_variation(encode_variation(ds));
  EXPECT_EQ(ds2.Pi, ds.Pi);
  EXPECT_EQ(ds2.varying_rows, ds.varying_rows);
  EXPECT_EQ(ds2.layout.dims, ds.layout.dims);
  EXPECT_THROW(decode_samples(encode_variation(ds)), IoError);

  FullOrderEmbedding full(model);
  full.set_region(BoxRegion::axis_aligned(-Vec::Ones(3), Vec::Ones(3)));
  const AffineLpvModel l = decode_lpv(encode_lpv(full.lpv()));
  EXPECT_EQ(l.M0, full.lpv().M0);
  ASSERT_EQ(l.n_sched(), 3);
  EXPECT_EQ(l.Mi[2], full.lpv().Mi[2]);
  ASSERT_TRUE(l.region.has_value());
  EXPECT_EQ(l.region->hi, Vec::Ones(3));
}

TEST(Serialization, Reductions) {
  auto model = std::make_shared<AnalyticBenchmarkModel>();
  const SampleSet s = generate_dataset(*model, random_scenarios(*model, 5, 2.0, 1), 0.01, 500, 2);
  const auto [train, val] = split_by_trajectory(s, 5);
  const VariationDataset ds = build_variation_dataset(*model, train);
  const VariationDataset dv = build_variation_dataset(*model, val);
  const PcaReduction p = fit_pca(model, ds, fit_normalizer(ds.Pi, NormMode::MinMax), 2);
  const PcaReduction p2 = decode_pca(decode_container(encode_container(encode_pca(p))), model);
  EXPECT_EQ(p2.Us(), p.Us());
  EXPECT_EQ(p2.lpv().Mi[1], p.lpv().Mi[1]);
  EXPECT_EQ(p2.normalizer().mode, NormMode::MinMax);

  TrainConfig tc;
  tc.epochs = 2;
  tc.hidden = {6};
  tc.bypass = true;
  tc.learning_rate = 1e-3;
  const DnnReduction d = train_dnn(model, ds, train, dv, val, 2, tc);
  const DnnReduction d2 = decode_dnn(decode_container(encode_container(encode_dnn(d))), model);
  EXPECT_EQ(d2.network().params(), d.network().params());
  EXPECT_EQ(d2.gamma_hat(val.point(0)), d.gamma_hat(val.point(0)));
  EXPECT_EQ(d2.curve.size(), d.curve.size());
  EXPECT_EQ(d2.best_epoch, d.best_epoch);
  EXPECT_THROW(decode_pca(encode_dnn(d), model), IoError);
}

TEST(Pipeline, Sha256KnownAnswer) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Pipeline, ModelFactory) {
  EXPECT_EQ(make_model("analytic")->id(), "analytic");
  EXPECT_EQ(make_model("parafoil", {{"mass", 3.0}})->parameters()["mass"], 3.0);
  EXPECT_THROW(make_model("glider"), ConfigError);
  EXPECT_THROW(make_model("parafoil", {{"wingspan", 3.0}}), ConfigError);
}

TEST(Pipeline, OverridesDeriveSeeds) {
  Overrides o;
  o.seed = 100;
  o.method = "kabsch";
  o.nhat = {4, 2};
  const auto j = apply_overrides(nlohmann::json::object(), o, "region");
  EXPECT_EQ(j["simulation"]["seed"], 100);
  EXPECT_EQ(j["dataset"]["seed"], 101);
  EXPECT_EQ(j["dnn"]["seed"], 102);
  EXPECT_EQ(j["region"]["seed"], 110);
  EXPECT_EQ(j["region"]["method"], "kabsch");
  EXPECT_EQ(j["pca"]["nhat"], nlohmann::json({4, 2}));
  o.method = "dnn";
  const auto k = apply_overrides(nlohmann::json::object(), o, "compare");
  EXPECT_EQ(k["compare"]["method"], "dnn");
  EXPECT_EQ(k["compare"]["nhat"], nlohmann::json({4, 2}));
  o.method = "kabsch";
  EXPECT_THROW(apply_overrides(nlohmann::json::object(), o, "compare"), ConfigError);
}

TEST(Pipeline, ConfigValidation) {
  EXPECT_NO_THROW(PipelineConfig::from_json(nlohmann::json::object()));
  EXPECT_THROW(PipelineConfig::from_json(parse_toml("[region]\nmethod = \"circle\"")), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(parse_toml("[pca]\nnhat = [0]")), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(parse_toml("[pca]\nnhat = [13]")), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(parse_toml("[simulation]\nh = -1.0")), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(parse_toml("[dataset]\nN = 2.5")), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(parse_toml("[pca]\nnormalizations = [\"l2\"]")), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(parse_toml("[compare]\nmaneuver = \"loop\"")), ConfigError);
  const auto a = PipelineConfig::from_json(nlohmann::json::object());
  const auto b = PipelineConfig::from_json(parse_toml("[dataset]\nN = 50000"));
  EXPECT_EQ(a.config_hash(), b.config_hash());
}

TEST(Pipeline, MissingArtifactNamesProducer) {
  const fs::path dir = scratch("missing");
  Pipeline p(PipelineConfig::from_json(small_config()), dir);
  try {
    p.run_stage("embed", [&] { p.embed(); });
    FAIL() << "embed ran without a dataset";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "simulate");
    EXPECT_NE(std::string(e.what()).find("lpvred simulate"), std::string::npos);
  }
  EXPECT_THROW(p.run_stage("evaluate", [&] { p.evaluate(); }), StageError);
}

TEST(Pipeline, FullRunProducesArtifactsAndIsReproducible) {
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const nlohmann::json ma = run_pipeline(small_config(), a);
  const nlohmann::json mb = run_pipeline(small_config(), b);
  EXPECT_EQ(ma.dump(), mb.dump());
  EXPECT_EQ(detail::read_file(a / "manifest.json"), detail::read_file(b / "manifest.json"));
  for (const char* f : {"dataset/train_samples.lpvc", "dataset/val_samples.lpvc", "embedding/pi_train.lpvc",
                        "embedding/full_lpv.lpvc", "embedding/exactness.json", "pca/std/spectrum.csv",
                        "pca/minmax/n2.lpvc", "regions/kabsch/pca_std/n2.json", "regions/kabsch/pca_std/n2_points.csv",
                        "reports/errors.csv", "compare/pca_std_trajectories.csv", "compare/pca_std_summary.json"})
    EXPECT_TRUE(fs::exists(a / f)) << f;
  EXPECT_LE(read_json(a / "embedding/exactness.json")["max_relative_error"].get<double>(), 1e-10);

  const CsvTable errors = read_csv(a / "reports/errors.csv");
  EXPECT_EQ(errors.header, (std::vector<std::string>{"method", "normalization", "n_theta_hat", "measure", "value", "N",
                                                     "dataset"}));
  EXPECT_EQ(errors.rows.size(), 2u * 3u * 4u * 2u);

  const auto region = read_json(a / "regions/kabsch/pca_std/n2.json");
  EXPECT_GE(region["conservatism"]["ratio"].get<double>(), 0.0);
  const auto summary = read_json(a / "compare/pca_std_summary.json");
  EXPECT_EQ(summary["models"].size(), 3u);
  EXPECT_LE(summary["models"][0]["max_state_error"].get<double>(), 1e-8);

  for (const auto& art : ma["artifacts"]) {
    EXPECT_FALSE(fs::path(art["path"].get<std::string>()).is_absolute());
    EXPECT_EQ(art["sha256"], sha256_hex(detail::read_file(a / art["path"].get<std::string>())));
  }
}

TEST(Cli, StagesAndExitCodes) {
  const fs::path dir = scratch("cli");
  {
    std::ofstream cfg(dir / "cfg.toml");
    cfg << small_config().dump();
  }
  const std::string common = "--config " + (dir / "cfg.toml").string() + " --out " + (dir / "out").string() + " --quiet";

  Command c = run_cli("embed " + common);
  EXPECT_EQ(c.status, 3);
  EXPECT_NE(c.output.find("lpvred simulate"), std::string::npos) << c.output;

  c = run_cli("simulate " + common);
  EXPECT_EQ(c.status, 0) << c.output;
  EXPECT_NE(c.output.find("simulate: ok"), std::string::npos);
  EXPECT_EQ(run_cli("embed " + common).status, 0);
  EXPECT_EQ(run_cli("reduce-pca --nhat 2,3 --norm std " + common).status, 0);
  EXPECT_TRUE(fs::exists(dir / "out/pca/std/n3.lpvc"));
  EXPECT_FALSE(fs::exists(dir / "out/pca/minmax"));

  c = run_cli("region --dim 3 --method kabsch " + common);
  EXPECT_EQ(c.status, 0) << c.output;
  EXPECT_TRUE(fs::exists(dir / "out/regions/kabsch/pca_std/n3.json"));
  EXPECT_FALSE(fs::exists(dir / "out/regions/kabsch/pca_std/n2.json"));
  EXPECT_EQ(run_cli("region --dim 5 " + common).status, 3);
  EXPECT_EQ(run_cli("region --method ellipsoid --dim 2 " + common).status, 0);
  EXPECT_TRUE(fs::exists(dir / "out/regions/ellipsoid/pca_std/n2.json"));

  EXPECT_EQ(run_cli("evaluate " + common).status, 0);
  c = run_cli("compare --nhat 5 " + common);
  EXPECT_EQ(c.status, 3);
  EXPECT_NE(c.output.find("reduce-pca"), std::string::npos) << c.output;
  EXPECT_EQ(run_cli("compare --nhat 2 " + common).status, 0);
  const auto manifest = read_json(dir / "out/manifest.json");
  EXPECT_EQ(manifest["tool_version"], kToolVersion);

  EXPECT_EQ(run_cli("simulate --config " + (dir / "nope.toml").string()).status, 2);
  {
    std::ofstream bad(dir / "bad.toml");
    bad << "[dataset]\nbogus = 1\n";
  }
  c = run_cli("simulate --config " + (dir / "bad.toml").string() + " --out " + (dir / "bad").string());
  EXPECT_EQ(c.status, 2);
  EXPECT_NE(c.output.find("dataset.bogus"), std::string::npos) << c.output;
  EXPECT_EQ(run_cli("region --method circle " + common).status, 2);
  EXPECT_EQ(run_cli("").status, 2);
  EXPECT_EQ(run_cli("--version").status, 0);
}

}  // namespace
}  // namespace lpvred
