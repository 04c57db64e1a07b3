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


// Command-line front end for the staged pipeline.

#include <lpvred/pipeline.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct Args {
  std::string config;
  std::string out = "lpvred_out";
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::vector<int> nhat;
  std::vector<std::string> norms;
  std::string method;
  std::optional<int> dim;
  bool quiet = false;
};

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("--config", a.config, "Configuration file (TOML subset or JSON)");
  sub->add_option("--out", a.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", a.seed, "Master seed; stage seeds are derived from it");
  sub->add_flag("--deterministic", a.deterministic, "Force single-threaded numerics");
  sub->add_flag("--quiet", a.quiet, "Suppress warnings");
}

int run(const std::string& stage, const Args& a) {
  using namespace lpvred;
  set_warnings_enabled(!a.quiet);
  nlohmann::json user = nlohmann::json::object();
  Overrides o;
  o.seed = a.seed;
  if (a.deterministic) o.deterministic = true;
  o.nhat = a.nhat;
  o.norms = a.norms;
  o.method = a.method;
  o.dim = a.dim;
  std::optional<Pipeline> p;
  try {
    if (!a.config.empty()) user = load_config_file(a.config);
    p.emplace(PipelineConfig::from_json(apply_overrides(user, o, stage)), a.out);
  } catch (const ConfigError& e) {
    std::cerr << "lpvred: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "lpvred: config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    if (stage == "run") {
      p->run_all();
    } else if (stage == "simulate") {
      p->run_stage(stage, [&] { p->simulate(); });
    } else if (stage == "embed") {
      p->run_stage(stage, [&] { p->embed(); });
    } else if (stage == "reduce-pca") {
      p->run_stage(stage, [&] { p->reduce_pca(); });
    } else if (stage == "reduce-dnn") {
      p->run_stage(stage, [&] { p->reduce_dnn(); });
    } else if (stage == "region") {
      p->run_stage(stage, [&] { p->region(a.dim); });
    } else if (stage == "evaluate") {
      p->run_stage(stage, [&] { p->evaluate(); });
    } else if (stage == "compare") {
      p->run_stage(stage, [&] { p->compare(); });
    }
    const auto m = p->write_manifest();
    std::cout << stage << ": ok (" << m["artifacts"].size() << " artifacts in " << a.out << ")\n";
  } catch (const ConfigError& e) {
    std::cerr << "lpvred: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StageError& e) {
    std::cerr << "lpvred: stage '" << e.stage() << "' failed: " << e.what() << '\n';
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "lpvred: stage '" << stage << "' failed: " << e.what() << '\n';
    return kExitStage;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scheduling-dimension reduction for LPV embeddings of nonlinear models"};
  app.set_version_flag("--version", std::string(lpvred::kToolVersion));
  app.require_subcommand(1);
  Args args;
  const std::vector<std::pair<std::string, std::string>> stages = {
      {"simulate", "Simulate scenarios and write training/validation samples"},
      {"embed", "Build the full-order embedding and the variation datasets"},
      {"reduce-pca", "Fit PCA reductions over the normalization/dimension sweep"},
      {"reduce-dnn", "Train network reductions over the normalization/dimension sweep"},
      {"region", "Construct scheduling regions and conservatism ratios"},
      {"evaluate", "Compute e_Pi and e_xdot reports"},
      {"compare", "Open-loop trajectory comparison against the nonlinear model"},
      {"run", "Run every enabled stage"}};
  for (const auto& [name, help] : stages) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, args);
    if (name != "simulate" && name != "embed") {
      sub->add_option("--nhat", args.nhat, "Reduced scheduling dimensions, e.g. 3,5,10")->delimiter(',');
      sub->add_option("--norm", args.norms, "Normalization(s): std, minmax")
          ->delimiter(',')
          ->check(CLI::IsMember({"std", "minmax"}));
    }
    if (name == "region") {
      sub->add_option("--method", args.method, "Region method")
          ->check(CLI::IsMember({"axis_aligned", "kabsch", "ellipsoid", "sphere"}));
      sub->add_option("--dim", args.dim, "Only the reductions with this dimension");
    } else if (name == "compare" || name == "run") {
      sub->add_option("--method", args.method, "Reduction method")->check(CLI::IsMember({"pca", "dnn"}));
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kExitConfig;
  }
  for (const auto& [name, help] : stages)
    if (app.got_subcommand(name)) return run(name, args);
  return kExitConfig;
}
