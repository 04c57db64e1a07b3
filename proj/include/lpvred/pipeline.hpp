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

/** \file
    The staged pipeline behind the command-line tool. Each stage reads the
    artifacts of earlier stages from the output directory, so stages can be
    run one at a time or all together.

        simulate    dataset/{train,val}_samples.lpvc
        embed       embedding/{pi_train,pi_val,full_lpv}.lpvc, model.json, exactness.json
        reduce-pca  pca/<norm>/n<k>.lpvc (+ .json), pca/<norm>/spectrum.csv
        reduce-dnn  dnn/<norm>/n<k>.lpvc (+ .json), dnn/<norm>/n<k>_curve.csv
        region      regions/<method>/<norm>/n<k>.json, n<k>_lpv.lpvc, n<k>_points.csv
        evaluate    reports/errors.csv, reports/<method>_<norm>_n<k>.json
        compare     compare/<method>_<norm>_trajectories.csv, compare/<method>_<norm>_summary.json

    Requires linking OpenSSL's libcrypto (SHA-256 for the manifest).
*/

#ifndef LPVRED_PIPELINE_HPP
#define LPVRED_PIPELINE_HPP

#include "config.hpp"
#include "io.hpp"
#include "models/analytic_benchmark.hpp"
#include "models/parafoil.hpp"
#include "region.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace lpvred {

inline constexpr const char* kToolVersion = "0.3.0";

/// A stage that cannot run or failed; `stage` names the subcommand.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what) : Error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline ModelPtr make_model(const std::string& id, const nlohmann::json& parameters = nlohmann::json::object()) {
  if (id == "analytic") {
    if (!parameters.empty()) throw ConfigError("model 'analytic' takes no parameters");
    return std::make_shared<AnalyticBenchmarkModel>();
  }
  if (id == "parafoil") {
    try {
      return std::make_shared<ParafoilModel>(ParafoilParams::from_json(parameters));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("model.parameters: ") + e.what());
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  throw ConfigError("unknown model '" + id + "' (expected analytic or parafoil)");
}

/// Checked view of a merged configuration.
struct PipelineConfig {
  nlohmann::json json;  ///< effective configuration (defaults + overrides)
  ModelPtr model;

  int integer(const nlohmann::json& j, const std::string& key, int lo, int hi = std::numeric_limits<int>::max()) const {
    const double v = j.at(key).get<double>();
    if (v != std::floor(v) || v < lo || v > hi)
      throw ConfigError("config: '" + key + "' must be an integer in [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    return static_cast<int>(v);
  }

  std::vector<int> nhat_list(const nlohmann::json& arr, const std::string& key, int max) const {
    std::vector<int> out;
    for (const auto& v : arr) {
      if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > max)
        throw ConfigError("config: '" + key + "' entries must be integers in [1, " + std::to_string(max) + "]");
      out.push_back(v.get<int>());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  static PipelineConfig from_json(const nlohmann::json& user) {
    PipelineConfig c;
    c.json = merge_config(user);
    c.validate();
    return c;
  }

  void validate() {
    const auto& j = json;
    model = make_model(j["model"]["id"].get<std::string>(), j["model"]["parameters"]);
    const auto& sim = j["simulation"];
    if (!(sim["h"].get<double>() > 0) || !(sim["T"].get<double>() >= sim["h"].get<double>()))
      throw ConfigError("config: simulation.h must be positive and simulation.T >= h");
    integer(sim, "scenarios", 2);
    integer(sim, "seed", 0);
    integer(sim, "validation_stride", 2);
    if (!(sim["dwell_min"].get<double>() > 0) || sim["dwell_max"].get<double>() < sim["dwell_min"].get<double>())
      throw ConfigError("config: need 0 < simulation.dwell_min <= simulation.dwell_max");
    integer(j["dataset"], "N", 4);
    integer(j["dataset"], "seed", 0);
    integer(j["dataset"], "exactness_points", 1);
    gamma_blocks_from_string(j["dataset"]["blocks"]);
    const GammaLayout layout{model->dims(), gamma_blocks_from_string(j["dataset"]["blocks"])};
    const int max_nhat = layout.size();
    for (const char* m : {"pca", "dnn"}) {
      for (const auto& n : j[m]["normalizations"]) {
        if (!n.is_string()) throw ConfigError(std::string("config: ") + m + ".normalizations must hold strings");
        try {
          norm_mode_from_string(n.get<std::string>());
        } catch (const Error& e) {
          throw ConfigError(e.what());
        }
      }
      nhat_list(j[m]["nhat"], std::string(m) + ".nhat", max_nhat);
    }
    const auto& dnn = j["dnn"];
    for (const auto& h : dnn["hidden"])
      if (!h.is_number_integer() || h.get<int>() < 1) throw ConfigError("config: dnn.hidden entries must be positive integers");
    integer(dnn, "batch_size", 1);
    integer(dnn, "epochs", 1);
    integer(dnn, "patience", 1);
    integer(dnn, "seed", 0);
    integer(dnn, "early_stopping_stride", 2);
    if (!(dnn["learning_rate"].get<double>() > 0) || dnn["l2"].get<double>() < 0)
      throw ConfigError("config: dnn.learning_rate must be positive and dnn.l2 nonnegative");
    const std::string rm = j["region"]["method"];
    if (rm != "axis_aligned" && rm != "kabsch" && rm != "ellipsoid" && rm != "sphere")
      throw ConfigError("config: region.method must be axis_aligned, kabsch, ellipsoid or sphere");
    integer(j["region"], "mc_samples", 1);
    integer(j["region"], "seed", 0);
    integer(j["region"], "conservatism_max_dim", 0);
    if (!(j["region"]["mvee_tolerance"].get<double>() > 0)) throw ConfigError("config: region.mvee_tolerance must be positive");
    for (const auto& d : j["evaluate"]["datasets"])
      if (d != "validation" && d != "training") throw ConfigError("config: evaluate.datasets entries are validation or training");
    const std::string cm = j["compare"]["method"];
    if (cm != "pca" && cm != "dnn") throw ConfigError("config: compare.method must be pca or dnn");
    nhat_list(j["compare"]["nhat"], "compare.nhat", max_nhat);
    const auto names = maneuver_names();
    if (std::find(names.begin(), names.end(), j["compare"]["maneuver"].get<std::string>()) == names.end())
      throw ConfigError("config: unknown compare.maneuver");
    if (!(j["compare"]["h"].get<double>() > 0) || !(j["compare"]["T"].get<double>() >= j["compare"]["h"].get<double>()))
      throw ConfigError("config: compare.h must be positive and compare.T >= h");
    integer(j["run"], "threads", 1, 256);
  }

  unsigned threads() const {
    return json["run"]["deterministic"].get<bool>() ? 1u : json["run"]["threads"].get<unsigned>();
  }
  GammaLayout layout() const { return {model->dims(), gamma_blocks_from_string(json["dataset"]["blocks"])}; }
  std::string config_hash() const { return sha256_hex(json.dump()); }
};

/// Command-line overrides applied on top of the file configuration.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<bool> deterministic;
  std::vector<int> nhat;
  std::vector<std::string> norms;
  std::string method;  ///< pca/dnn, or a region method for the region stage
  std::optional<int> dim;
};

/// Applies overrides for `stage` to the user configuration before merging.
inline nlohmann::json apply_overrides(nlohmann::json user, const Overrides& o, const std::string& stage) {
  if (!user.is_object()) user = nlohmann::json::object();
  auto sect = [&](const char* name) -> nlohmann::json& {
    auto& s = user[name];
    if (s.is_null()) s = nlohmann::json::object();
    return s;
  };
  if (o.seed) {
    // One master seed; the stage seeds are derived from it.
    sect("simulation")["seed"] = *o.seed;
    sect("dataset")["seed"] = *o.seed + 1;
    sect("dnn")["seed"] = *o.seed + 2;
    sect("region")["seed"] = *o.seed + 10;
  }
  if (o.deterministic) sect("run")["deterministic"] = *o.deterministic;
  const bool region_stage = stage == "region";
  if (!o.method.empty()) {
    if (region_stage) {
      sect("region")["method"] = o.method;
    } else if (o.method == "pca" || o.method == "dnn") {
      sect("compare")["method"] = o.method;
      if (stage == "reduce-dnn" || stage == "run" || o.method == "dnn") sect(o.method.c_str())["enabled"] = true;
    } else {
      throw ConfigError("--method must be pca or dnn for '" + stage + "'");
    }
  }
  if (!o.nhat.empty()) {
    nlohmann::json arr = o.nhat;
    if (stage == "compare") {
      sect("compare")["nhat"] = arr;
    } else {
      sect("pca")["nhat"] = arr;
      sect("dnn")["nhat"] = arr;
      if (stage == "run") sect("compare")["nhat"] = arr;
    }
  }
  if (!o.norms.empty()) {
    nlohmann::json arr = o.norms;
    sect("pca")["normalizations"] = arr;
    sect("dnn")["normalizations"] = arr;
    sect("compare")["normalization"] = o.norms.front();
  }
  return user;
}

/// Stage runner bound to an output directory.
class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, std::filesystem::path out) : cfg_(std::move(cfg)), out_(std::move(out)) {
    std::filesystem::create_directories(out_);
  }

  const PipelineConfig& config() const { return cfg_; }
  const std::filesystem::path& out() const { return out_; }

  // -- simulate ------------------------------------------------------------
  void simulate() {
    const auto& s = cfg_.json["simulation"];
    const auto& model = *cfg_.model;
    const auto scen = random_scenarios(model, s["scenarios"].get<int>(), s["T"].get<double>(),
                                       s["seed"].get<std::uint64_t>(), s["dwell_min"].get<double>(),
                                       s["dwell_max"].get<double>());
    // Take the whole pool, split it by trajectory, then subsample the training part to N.
    DatasetOptions opts{cfg_.threads(), true};
    const SampleSet all = generate_dataset(model, scen, s["h"].get<double>(), std::numeric_limits<Eigen::Index>::max(),
                                           cfg_.json["dataset"]["seed"].get<std::uint64_t>(), opts);
    auto [train, val] = split_by_trajectory(all, s["validation_stride"].get<int>());
    const auto N = cfg_.json["dataset"]["N"].get<Eigen::Index>();
    train = subsample(train, N, cfg_.json["dataset"]["seed"].get<std::uint64_t>());
    val = subsample(val, std::max<Eigen::Index>(N / (s["validation_stride"].get<int>() - 1), 2),
                    cfg_.json["dataset"]["seed"].get<std::uint64_t>() + 1);
    if (train.size() < 4 || val.size() < 2) throw StageError("simulate", "too few samples after the train/validation split");
    write_container(out_ / "dataset/train_samples.lpvc", encode_samples(train));
    write_container(out_ / "dataset/val_samples.lpvc", encode_samples(val));
    write_json(out_ / "dataset/summary.json", {{"model", model.id()},
                                               {"scenarios", scen.size()},
                                               {"pool", all.size()},
                                               {"train", train.size()},
                                               {"validation", val.size()},
                                               {"train_out_of_region", train.out_of_region()},
                                               {"validation_out_of_region", val.out_of_region()}});
  }

  // -- embed ---------------------------------------------------------------
  void embed() {
    const auto train = load_samples("train");
    const auto val = load_samples("val");
    const GammaLayout layout = cfg_.layout();
    const auto& model = *cfg_.model;
    write_container(out_ / "embedding/pi_train.lpvc", encode_variation(build_variation_dataset(model, train, layout.blocks)));
    write_container(out_ / "embedding/pi_val.lpvc", encode_variation(build_variation_dataset(model, val, layout.blocks)));
    FullOrderEmbedding full(cfg_.model);
    write_json(out_ / "embedding/exactness.json",
               embedding_exactness(full, cfg_.json["dataset"]["exactness_points"].get<int>(),
                                   cfg_.json["dataset"]["seed"].get<std::uint64_t>() + 100));
    const auto theta_iv = full_scheduling_region(model, 16);
    Vec lo(theta_iv.size()), hi(theta_iv.size());
    for (size_t i = 0; i < theta_iv.size(); ++i) {
      lo[static_cast<Eigen::Index>(i)] = theta_iv[i].lo;
      hi[static_cast<Eigen::Index>(i)] = theta_iv[i].hi;
    }
    full.set_region(BoxRegion::axis_aligned(lo, hi));
    write_container(out_ / "embedding/full_lpv.lpvc", encode_lpv(full.lpv()));
    write_json(out_ / "embedding/model.json", model_metadata(model));
  }

  /// Largest relative error |f - M(theta) z| / max(1, |f|) at random operating-region points.
  nlohmann::json embedding_exactness(const FullOrderEmbedding& full, int points, std::uint64_t seed) const {
    const auto& model = *cfg_.model;
    std::mt19937_64 rng(seed);
    const OperatingRegion region = model.operating_region();
    double worst = 0.0;
    for (int k = 0; k < points; ++k) {
      StateSpacePoint pt = region.sample(rng);
      pt.w.setZero();
      const Vec f = evaluate_f(model, pt);
      const Vec xd = evaluate_lpv(full.lpv(), full.theta_hat(pt), pt.x, pt.u, pt.w).xdot;
      worst = std::max(worst, (f - xd).norm() / std::max(1.0, f.norm()));
    }
    return {{"points", points}, {"max_relative_error", worst}, {"n_theta", full.n_sched()}};
  }

  // -- reduce-pca ----------------------------------------------------------
  void reduce_pca() {
    const auto& pc = cfg_.json["pca"];
    const VariationDataset ds = load_variation("train");
    const auto nhat = cfg_.nhat_list(pc["nhat"], "pca.nhat", static_cast<int>(std::min(ds.n_pi(), ds.n_samples())));
    for (const auto& nm : pc["normalizations"]) {
      const NormMode mode = norm_mode_from_string(nm);
      const PcaBasis basis = fit_pca_basis(ds.Pi, fit_normalizer(ds.Pi, mode));
      CsvTable spec{{"index", "sigma", "energy", "normalization", "numerically_zero"}, {}};
      const double thr = basis.rank_threshold();
      for (const auto& r : spectrum(basis))
        spec.add_row({std::to_string(r.index), fmt(r.sigma), fmt(r.energy), to_string(mode), r.sigma <= thr ? "1" : "0"});
      const auto dir = out_ / "pca" / to_string(mode);
      write_csv(dir / "spectrum.csv", spec);
      for (int n : nhat) {
        PcaReduction red(cfg_.model, basis, ds.layout, n);
        write_container(dir / ("n" + std::to_string(n) + ".lpvc"), encode_pca(red));
        write_json(dir / ("n" + std::to_string(n) + ".json"),
                   {{"method", "pca"},
                    {"normalization", to_string(mode)},
                    {"n_s", n},
                    {"numerical_rank", basis.numerical_rank()},
                    {"gram_route", basis.gram},
                    {"training_samples", basis.samples},
                    {"singular_values", std::vector<double>(basis.sigma.data(), basis.sigma.data() + basis.sigma.size())},
                    {"lpv", lpv_summary(red.lpv())}});
      }
    }
  }

  // -- reduce-dnn ----------------------------------------------------------
  void reduce_dnn() {
    const auto& dc = cfg_.json["dnn"];
    const SampleSet train_all = load_samples("train");
    const VariationDataset ds_all = load_variation("train");
    // Early stopping watches trajectories held out of the training split, never the validation split.
    SampleSet fit = train_all, stop;
    std::tie(fit, stop) = split_by_trajectory(train_all, dc["early_stopping_stride"].get<int>());
    if (stop.size() < 2 || fit.size() < 2) {
      warn("reduce-dnn: early-stopping split is empty; using the training data");
      fit = train_all;
      stop = train_all;
    }
    const GammaLayout layout = ds_all.layout;
    const VariationDataset ds_fit = build_variation_dataset(*cfg_.model, fit, layout.blocks);
    const VariationDataset ds_stop = build_variation_dataset(*cfg_.model, stop, layout.blocks);
    TrainConfig tc;
    tc.learning_rate = dc["learning_rate"];
    tc.batch_size = dc["batch_size"];
    tc.epochs = dc["epochs"];
    tc.l2 = dc["l2"];
    tc.patience = dc["patience"];
    tc.bypass = dc["bypass"];
    tc.seed = dc["seed"];
    tc.hidden = dc["hidden"].get<std::vector<int>>();
    const auto nhat = cfg_.nhat_list(dc["nhat"], "dnn.nhat", layout.size());
    for (const auto& nm : dc["normalizations"]) {
      tc.norm = norm_mode_from_string(nm);
      const auto dir = out_ / "dnn" / to_string(tc.norm);
      for (int n : nhat) {
        const DnnReduction red = train_dnn(cfg_.model, ds_fit, fit, ds_stop, stop, n, tc);
        write_container(dir / ("n" + std::to_string(n) + ".lpvc"), encode_dnn(red));
        CsvTable curve{{"epoch", "train_loss", "val_loss"}, {}};
        for (const auto& e : red.curve) curve.add_row({std::to_string(e.epoch), fmt(e.train_loss), fmt(e.val_loss)});
        write_csv(dir / ("n" + std::to_string(n) + "_curve.csv"), curve);
        write_json(dir / ("n" + std::to_string(n) + ".json"), {{"method", "dnn"},
                                                               {"normalization", to_string(tc.norm)},
                                                               {"n_theta_hat", n},
                                                               {"best_epoch", red.best_epoch},
                                                               {"epochs_run", red.curve.size() - 1},
                                                               {"bypass", tc.bypass},
                                                               {"hidden", tc.hidden},
                                                               {"lpv", lpv_summary(red.lpv())}});
      }
    }
  }

  // -- region --------------------------------------------------------------
  void region(std::optional<int> only_dim = std::nullopt) {
    const auto& rc = cfg_.json["region"];
    const std::string method = rc["method"];
    const VariationDataset ds = load_variation("train");
    const SampleSet train = load_samples("train");
    auto reds = load_reductions("region");
    if (only_dim) {
      std::erase_if(reds, [&](const auto& r) { return r.red->n_sched() != *only_dim; });
      if (reds.empty())
        throw StageError("region", "no reduction with n_theta_hat = " + std::to_string(*only_dim) +
                                       "; run `lpvred reduce-pca` or `lpvred reduce-dnn` with --nhat " +
                                       std::to_string(*only_dim));
    }
    for (auto& r : reds) {
      const Mat pts = scheduling_cloud(*r.red, ds, train);
      const int d = static_cast<int>(pts.rows());
      BoxRegion box;
      nlohmann::json extra = nlohmann::json::object();
      if (method == "axis_aligned" || (method == "kabsch" && d > 3)) {
        box = axis_aligned_box(pts);
        if (method == "kabsch") box.note = "kabsch limited to dimension <= 3; axis-aligned box used";
      } else if (method == "kabsch") {
        box = kabsch_box(pts);
      } else {
        const Ellipsoid ell = method == "ellipsoid"
                                  ? min_volume_ellipsoid(pts, rc["mvee_tolerance"].get<double>())
                                  : min_enclosing_sphere(pts, rc["seed"].get<std::uint64_t>());
        box = ellipsoid_to_box(ell);
        extra["enclosing"] = ell.to_json();
      }
      const BoxRegion aligned = axis_aligned_box(pts);
      nlohmann::json rep{{"method", method},
                         {"source", r.method},
                         {"normalization", r.norm},
                         {"n_theta_hat", d},
                         {"points", pts.cols()},
                         {"box", box.to_json()},
                         {"axis_aligned_volume", aligned.volume()}};
      rep.update(extra);
      if (rc["conservatism"].get<bool>() && d <= rc["conservatism_max_dim"].get<int>()) {
        ConservatismOptions co;
        co.samples = rc["mc_samples"].get<std::size_t>();
        co.seed = rc["seed"].get<std::uint64_t>();
        co.threads = cfg_.threads();
        rep["conservatism"] = conservatism_ratio(pts, box, co).to_json();
      }
      const auto dir = out_ / "regions" / method / (r.method + "_" + r.norm);
      const std::string stem = "n" + std::to_string(d);
      write_json(dir / (stem + ".json"), rep);
      AffineLpvModel lpv = r.red->lpv();
      lpv.region = box;
      write_container(dir / (stem + "_lpv.lpvc"), encode_lpv(lpv));
      if (d <= 3) write_points_csv(dir / (stem + "_points.csv"), pts, box);
    }
  }

  // -- evaluate ------------------------------------------------------------
  void evaluate() {
    const auto& ec = cfg_.json["evaluate"];
    auto reds = load_reductions("evaluate");
    std::map<std::string, std::pair<VariationDataset, SampleSet>> data;
    for (const auto& d : ec["datasets"]) {
      const std::string which = d == "training" ? "train" : "val";
      data.emplace(d.get<std::string>(), std::make_pair(load_variation(which), load_samples(which)));
    }
    std::string csv = error_csv_header();
    for (const auto& r : reds) {
      nlohmann::json per_dataset = nlohmann::json::object();
      for (const auto& [name, dd] : data) {
        ErrorReport rep = evaluate_reduction(*cfg_.model, *r.red, dd.first, dd.second, r.norm, name, cfg_.threads());
        rep.mean_square = ec["mean_square"].get<bool>();
        csv += error_csv_rows(rep);
        per_dataset[name] = rep.to_json();
      }
      write_json(out_ / "reports" / (r.method + "_" + r.norm + "_n" + std::to_string(r.red->n_sched()) + ".json"),
                 per_dataset);
    }
    detail::write_file(out_ / "reports/errors.csv", csv);
  }

  // -- compare -------------------------------------------------------------
  void compare(std::optional<std::vector<int>> only = std::nullopt) {
    const auto& cc = cfg_.json["compare"];
    const std::string method = cc["method"];
    std::string norm = cc["normalization"];
    if (norm.empty()) norm = cfg_.json[method]["normalizations"].at(0);
    const auto nhat = only ? *only : cfg_.nhat_list(cc["nhat"], "compare.nhat", cfg_.layout().size());
    std::vector<std::unique_ptr<ReducedScheduling>> owned;
    std::vector<std::string> labels;
    owned.push_back(std::make_unique<FullOrderEmbedding>(cfg_.model));
    labels.push_back("full");
    for (int n : nhat) {
      const auto path = out_ / method / norm / ("n" + std::to_string(n) + ".lpvc");
      if (!std::filesystem::exists(path))
        throw StageError("compare", "missing " + path.lexically_relative(out_).string() + "; run `lpvred reduce-" +
                                        method + " --nhat " + std::to_string(n) + "` first");
      owned.push_back(load_reduction(path, method));
      labels.push_back(method + "_n" + std::to_string(n));
    }
    std::vector<const ReducedScheduling*> ptrs;
    for (const auto& o : owned) ptrs.push_back(o.get());
    const auto& model = *cfg_.model;
    const double T = cc["T"], h = cc["h"];
    const Vec x0 = model.reference_point().x;
    const InputSignal input = maneuver(model, cc["maneuver"], T);
    const TrajectoryComparison cmp = compare_trajectories(model, ptrs, labels, x0, input, h, T);
    CsvTable t;
    t.header = {"model", "t"};
    for (int i = 0; i < model.dims().nx; ++i) t.header.push_back("x" + std::to_string(i));
    auto dump = [&](const std::string& label, const Trajectory& tr) {
      for (size_t k = 0; k < tr.points.size(); ++k) {
        std::vector<std::string> row{label, fmt(tr.time(k))};
        for (Eigen::Index i = 0; i < tr.points[k].x.size(); ++i) row.push_back(fmt(tr.points[k].x[i]));
        t.add_row(std::move(row));
      }
    };
    dump("nonlinear", cmp.reference);
    for (size_t m = 0; m < cmp.reduced.size(); ++m) dump(labels[m], cmp.reduced[m]);
    const std::string stem = method + "_" + norm;
    write_csv(out_ / "compare" / (stem + "_trajectories.csv"), t);
    nlohmann::json summary = cmp.summary();
    summary["maneuver"] = cc["maneuver"];
    summary["method"] = method;
    summary["normalization"] = norm;
    write_json(out_ / "compare" / (stem + "_summary.json"), summary);
  }

  /// Every stage in order; DNN and region stages follow the config switches.
  void run_all() {
    run_stage("simulate", [&] { simulate(); });
    run_stage("embed", [&] { embed(); });
    if (cfg_.json["pca"]["enabled"].get<bool>()) run_stage("reduce-pca", [&] { reduce_pca(); });
    if (cfg_.json["dnn"]["enabled"].get<bool>()) run_stage("reduce-dnn", [&] { reduce_dnn(); });
    if (cfg_.json["region"]["enabled"].get<bool>()) run_stage("region", [&] { region(); });
    if (cfg_.json["evaluate"]["enabled"].get<bool>()) run_stage("evaluate", [&] { evaluate(); });
    if (cfg_.json["compare"]["enabled"].get<bool>()) {
      const std::string m = cfg_.json["compare"]["method"];
      if (cfg_.json[m]["enabled"].get<bool>()) {
        // Compare only the dimensions that the reduce stage produced.
        const auto have = cfg_.json[m]["nhat"];
        std::vector<int> keep;
        for (const auto& v : cfg_.json["compare"]["nhat"])
          if (std::find(have.begin(), have.end(), v) != have.end()) keep.push_back(v.get<int>());
        if (!keep.empty()) run_stage("compare", [&] { compare(keep); });
      }
    }
  }

  template <class F>
  void run_stage(const std::string& name, F&& body) {
    try {
      body();
    } catch (const StageError&) {
      throw;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  }

  /// manifest.json: tool version, config hash and a SHA-256 per artifact.
  nlohmann::json write_manifest() const {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(out_))
      if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    nlohmann::json arts = nlohmann::json::array();
    for (const auto& f : files) {
      const std::string data = detail::read_file(f);
      arts.push_back({{"path", f.lexically_relative(out_).generic_string()}, {"bytes", data.size()}, {"sha256", sha256_hex(data)}});
    }
    nlohmann::json m{{"tool", "lpvred"},
                     {"tool_version", kToolVersion},
                     {"config_hash", cfg_.config_hash()},
                     {"config", cfg_.json},
                     {"artifacts", arts}};
    write_json(out_ / "manifest.json", m);
    return m;
  }

  struct LoadedReduction {
    std::string method, norm;
    std::unique_ptr<ReducedScheduling> red;
  };

  /// Reductions present in the output directory, in (method, norm, n) order.
  std::vector<LoadedReduction> load_reductions(const std::string& stage) const {
    std::vector<LoadedReduction> out;
    for (const char* method : {"pca", "dnn"}) {
      const auto root = out_ / method;
      if (!std::filesystem::exists(root)) continue;
      std::vector<std::filesystem::path> norms;
      for (const auto& e : std::filesystem::directory_iterator(root))
        if (e.is_directory()) norms.push_back(e.path());
      std::sort(norms.begin(), norms.end());
      for (const auto& nd : norms) {
        std::vector<std::pair<int, std::filesystem::path>> files;
        for (const auto& e : std::filesystem::directory_iterator(nd)) {
          const std::string fn = e.path().filename().string();
          if (e.path().extension() == ".lpvc" && fn.size() > 6 && fn[0] == 'n')
            files.emplace_back(std::stoi(fn.substr(1)), e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& [n, p] : files) out.push_back({method, nd.filename().string(), load_reduction(p, method)});
      }
    }
    if (out.empty())
      throw StageError(stage, "no reduction artifacts under " + out_.string() +
                                  "; run `lpvred reduce-pca` or `lpvred reduce-dnn` first");
    return out;
  }

  std::unique_ptr<ReducedScheduling> load_reduction(const std::filesystem::path& p, const std::string& method) const {
    const Container c = read_container(p);
    if (method == "pca") return std::make_unique<PcaReduction>(decode_pca(c, cfg_.model));
    return std::make_unique<DnnReduction>(decode_dnn(c, cfg_.model));
  }

  SampleSet load_samples(const std::string& which) const {
    const auto p = out_ / "dataset" / (which + "_samples.lpvc");
    require_artifact(p, "simulate");
    SampleSet s = decode_samples(read_container(p));
    if (s.model_id != cfg_.model->id())
      throw StageError("simulate", "dataset was produced for model '" + s.model_id + "'; rerun `lpvred simulate`");
    return s;
  }

  VariationDataset load_variation(const std::string& which) const {
    const auto p = out_ / "embedding" / ("pi_" + which + ".lpvc");
    require_artifact(p, "embed");
    VariationDataset ds = decode_variation(read_container(p));
    if (!(ds.layout.dims == cfg_.model->dims()) || ds.layout.blocks != cfg_.layout().blocks)
      throw StageError("embed", "variation dataset does not match the configured model; rerun `lpvred embed`");
    return ds;
  }

 private:
  void require_artifact(const std::filesystem::path& p, const std::string& producer) const {
    if (!std::filesystem::exists(p))
      throw StageError(producer, "missing " + p.lexically_relative(out_).string() + "; run `lpvred " + producer + "` first");
  }

  static SampleSet subsample(const SampleSet& s, Eigen::Index n, std::uint64_t seed) {
    if (n >= s.size()) return s;
    std::vector<Eigen::Index> idx(static_cast<size_t>(s.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < static_cast<size_t>(n); ++i) {
      std::uniform_int_distribution<size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(static_cast<size_t>(n));
    std::sort(idx.begin(), idx.end());
    return select_columns(s, idx);
  }

  /// thetahat over the training samples, one column per sample.
  static Mat scheduling_cloud(const ReducedScheduling& red, const VariationDataset& ds, const SampleSet& samples) {
    if (const auto* pca = dynamic_cast<const PcaReduction*>(&red)) return pca->project(ds.Pi);
    if (const auto* dnn = dynamic_cast<const DnnReduction*>(&red)) return dnn->theta_batch(select_columns(samples, ds.sample_index));
    Mat out(red.n_sched(), ds.n_samples());
    for (Eigen::Index k = 0; k < ds.n_samples(); ++k) out.col(k) = red.theta_hat(samples.point(ds.sample_index[static_cast<size_t>(k)]));
    return out;
  }

  /// Points plus box corners (kind column) for 3-D renders.
  static void write_points_csv(const std::filesystem::path& p, const Mat& pts, const BoxRegion& box) {
    CsvTable t;
    t.header = {"kind"};
    for (Eigen::Index i = 0; i < pts.rows(); ++i) t.header.push_back("theta" + std::to_string(i + 1));
    for (Eigen::Index k = 0; k < pts.cols(); ++k) {
      std::vector<std::string> row{"point"};
      for (Eigen::Index i = 0; i < pts.rows(); ++i) row.push_back(fmt(pts(i, k)));
      t.add_row(std::move(row));
    }
    const Mat corners = box.corners();
    for (Eigen::Index k = 0; k < corners.cols(); ++k) {
      std::vector<std::string> row{"box_corner"};
      for (Eigen::Index i = 0; i < corners.rows(); ++i) row.push_back(fmt(corners(i, k)));
      t.add_row(std::move(row));
    }
    write_csv(p, t);
  }

  PipelineConfig cfg_;
  std::filesystem::path out_;
};

/// Validates, runs every stage and writes the manifest.
inline nlohmann::json run_pipeline(const nlohmann::json& user_config, const std::filesystem::path& out) {
  Pipeline p(PipelineConfig::from_json(user_config), out);
  p.run_all();
  return p.write_manifest();
}

}  // namespace lpvred

#endif  // LPVRED_PIPELINE_HPP
