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
    Fixed-step classical Runge-Kutta integration and trajectory datasets.
*/

#ifndef LPVRED_SIM_HPP
#define LPVRED_SIM_HPP

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace lpvred {

/// Piecewise-constant input: segment i holds `u` on [t_start_i, t_end_i).
/// After the last segment the last value is held. Wind is constant.
struct InputSignal {
  struct Segment {
    double t_end = 0.0;
    Vec u;
  };
  std::vector<Segment> segments;
  Vec wind;
  std::string label = "constant";

  static InputSignal constant(Vec u, Vec wind) {
    InputSignal s;
    s.segments.push_back({std::numeric_limits<double>::infinity(), std::move(u)});
    s.wind = std::move(wind);
    return s;
  }

  const Vec& u_at(double t) const {
    if (segments.empty()) throw Error("input signal has no segments");
    for (const auto& s : segments)
      if (t < s.t_end) return s.u;
    return segments.back().u;
  }
};

/// One classical RK4 step of x' = rhs(x) with everything else held.
template <class Rhs>
Vec rk4_step(Rhs&& rhs, const Vec& x, double h) {
  const Vec k1 = rhs(x);
  const Vec k2 = rhs(Vec(x + 0.5 * h * k1));
  const Vec k3 = rhs(Vec(x + 0.5 * h * k2));
  const Vec k4 = rhs(Vec(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Trajectory {
  double h = 0.0;
  Vec x0;
  InputSignal input;
  std::vector<StateSpacePoint> points;  ///< points[k] at time k h
  bool diverged = false;
  int id = 0;

  double time(std::size_t k) const { return static_cast<double>(k) * h; }
};

/// Integrates an autonomous-in-(u,w) right-hand side with a zero-order hold
/// on the input. Non-finite states truncate the trajectory and set the
/// divergence flag.
template <class Rhs>
Trajectory integrate_rk4_with(Rhs&& rhs, const Vec& x0, const InputSignal& input, double h,
                              double T) {
  if (!(h > 0.0)) throw Error("integrate_rk4: step h must be positive");
  if (!(T >= h)) throw Error("integrate_rk4: horizon T must be at least one step");
  const auto steps = static_cast<std::size_t>(std::llround(T / h));
  Trajectory traj;
  traj.h = h;
  traj.x0 = x0;
  traj.input = input;
  traj.points.reserve(steps + 1);
  Vec x = x0;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * h;
    const Vec& u = input.u_at(t);
    traj.points.push_back({x, u, input.wind});
    if (k == steps) break;
    Vec next;
    try {
      next = rk4_step([&](const Vec& xs) { return rhs(StateSpacePoint{xs, u, input.wind}); }, x, h);
    } catch (const Error&) {
      traj.diverged = true;
      break;
    }
    if (!next.allFinite()) {
      traj.diverged = true;
      break;
    }
    x = std::move(next);
  }
  if (traj.points.size() < 2 && !traj.diverged) throw Error("integrate_rk4: trajectory too short");
  return traj;
}

inline Trajectory integrate_rk4(const FactorizedModel& model, const Vec& x0, const InputSignal& input,
                                double h, double T) {
  const ModelDims d = model.dims();
  require_dims(x0.size() == d.nx, "integrate_rk4: x0 has wrong length");
  require_dims(input.wind.size() == d.nw, "integrate_rk4: wind has wrong length");
  for (const auto& s : input.segments)
    require_dims(s.u.size() == d.nu, "integrate_rk4: input has wrong length");
  return integrate_rk4_with([&model](const StateSpacePoint& p) { return model.f(p); }, x0, input,
                            h, T);
}

struct Scenario {
  Vec x0;
  InputSignal input;
  double T = 0.0;
};

/// Random piecewise-constant inputs drawn uniformly from U with dwell times
/// in [dwell_min, dwell_max], and initial states from the model's sampler.
inline std::vector<Scenario> random_scenarios(const FactorizedModel& model, int count, double T,
                                              std::uint64_t seed, double dwell_min = 1.0,
                                              double dwell_max = 5.0) {
  const OperatingRegion region = model.operating_region();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dwell(dwell_min, dwell_max);
  std::vector<Scenario> out;
  for (int i = 0; i < count; ++i) {
    Scenario s;
    s.x0 = model.sample_initial_state(rng);
    s.input.wind = Vec::Zero(model.dims().nw);
    s.input.label = "random";
    double t = 0.0;
    while (t < T) {
      t += dwell(rng);
      Vec u(model.dims().nu);
      for (int j = 0; j < u.size(); ++j) {
        std::uniform_real_distribution<double> ud(region.u[static_cast<size_t>(j)].lo,
                                                  region.u[static_cast<size_t>(j)].hi);
        u[j] = ud(rng);
      }
      s.input.segments.push_back({t, u});
    }
    s.T = T;
    out.push_back(std::move(s));
  }
  return out;
}

/// Fixed maneuvers in normalized input levels (0 = lower bound, 1 = upper
/// bound of U); single-input models map the left/right difference around
/// the middle of U.
inline std::vector<std::string> maneuver_names() {
  return {"glide", "left_turn", "right_turn", "s_turn", "flare"};
}

inline InputSignal maneuver(const FactorizedModel& model, const std::string& name, double T) {
  const OperatingRegion region = model.operating_region();
  const int nu = model.dims().nu;
  auto level = [&](double left, double right) {
    Vec u(nu);
    for (int j = 0; j < nu; ++j) {
      const double l = nu >= 2 ? (j == 0 ? left : right) : 0.5 + 0.5 * (left - right);
      const Interval& b = region.u[static_cast<size_t>(j)];
      u[j] = b.lo + l * b.width();
    }
    return u;
  };
  InputSignal s;
  s.wind = Vec::Zero(model.dims().nw);
  s.label = name;
  if (name == "glide") {
    s.segments.push_back({T, level(0.0, 0.0)});
  } else if (name == "left_turn") {
    s.segments.push_back({0.2 * T, level(0.0, 0.0)});
    s.segments.push_back({T, level(0.6, 0.0)});
  } else if (name == "right_turn") {
    s.segments.push_back({0.2 * T, level(0.0, 0.0)});
    s.segments.push_back({T, level(0.0, 0.6)});
  } else if (name == "s_turn") {
    for (int k = 0; k < 6; ++k)
      s.segments.push_back({(k + 1) * T / 6.0, k % 2 == 0 ? level(0.5, 0.0) : level(0.0, 0.5)});
  } else if (name == "flare") {
    s.segments.push_back({0.8 * T, level(0.1, 0.1)});
    s.segments.push_back({T, level(1.0, 1.0)});
  } else {
    throw Error("unknown maneuver '" + name + "'");
  }
  return s;
}

/// Columnar set of sampled (x,u,w) tuples with provenance.
struct SampleSet {
  Mat X, U, W;                  ///< nx x N, nu x N, nw x N
  std::vector<int> trajectory;  ///< source trajectory id per sample
  std::vector<int> time_index;  ///< step index within that trajectory
  std::vector<bool> in_region;  ///< false when outside the operating region
  std::uint64_t seed = 0;
  std::string model_id;
  double h = 0.0;

  Eigen::Index size() const { return X.cols(); }
  StateSpacePoint point(Eigen::Index k) const { return {X.col(k), U.col(k), W.col(k)}; }
  std::size_t out_of_region() const {
    return static_cast<std::size_t>(std::count(in_region.begin(), in_region.end(), false));
  }
};

/// Maps an angle to [-pi, pi).
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return a - two_pi * std::floor((a + std::numbers::pi) / two_pi);
}

struct DatasetOptions {
  unsigned threads = 1;
  bool clamp = false;  ///< take the whole pool when N exceeds it
};

/// Simulates every scenario, pools all trajectory points in scenario order
/// and draws N of them uniformly without replacement. Selected indices are
/// kept in pool order, so N equal to the pool size returns the pool. Euler
/// angles are wrapped to [-pi, pi); the models only see them through
/// trigonometric functions.
inline SampleSet generate_dataset(const FactorizedModel& model, const std::vector<Scenario>& scenarios,
                                  double h, Eigen::Index N, std::uint64_t seed,
                                  DatasetOptions opts = {}) {
  if (N <= 0) throw Error("generate_dataset: sample count must be positive");
  std::vector<Trajectory> trajs(scenarios.size());
  parallel_for(scenarios.size(), opts.threads, [&](std::size_t i) {
    trajs[i] = integrate_rk4(model, scenarios[i].x0, scenarios[i].input, h, scenarios[i].T);
    trajs[i].id = static_cast<int>(i);
  });
  std::vector<std::pair<int, int>> pool;
  std::size_t usable = 0;
  for (const auto& t : trajs) {
    if (t.diverged)
      warn("trajectory " + std::to_string(t.id) + " diverged; truncated at step " +
           std::to_string(t.points.size()));
    if (t.points.size() >= 2) ++usable;
    for (std::size_t k = 0; k < t.points.size(); ++k) pool.emplace_back(t.id, static_cast<int>(k));
  }
  if (usable == 0) throw Error("generate_dataset: all scenarios diverged");
  if (opts.clamp) N = std::min<Eigen::Index>(N, static_cast<Eigen::Index>(pool.size()));
  if (static_cast<std::size_t>(N) > pool.size())
    throw Error("generate_dataset: requested " + std::to_string(N) + " samples but only " +
                std::to_string(pool.size()) + " trajectory points are available");

  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < static_cast<std::size_t>(N); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(N));
  std::sort(idx.begin(), idx.end());

  const ModelDims d = model.dims();
  const OperatingRegion region = model.operating_region();
  SampleSet set;
  set.X.resize(d.nx, N);
  set.U.resize(d.nu, N);
  set.W.resize(d.nw, N);
  set.seed = seed;
  set.model_id = model.id();
  set.h = h;
  const std::vector<int> angles = model.angular_states();
  for (Eigen::Index c = 0; c < N; ++c) {
    const auto [tid, k] = pool[idx[static_cast<std::size_t>(c)]];
    StateSpacePoint p = trajs[static_cast<std::size_t>(tid)].points[static_cast<std::size_t>(k)];
    for (int a : angles) p.x[a] = wrap_angle(p.x[a]);
    set.X.col(c) = p.x;
    set.U.col(c) = p.u;
    set.W.col(c) = p.w;
    set.trajectory.push_back(tid);
    set.time_index.push_back(k);
    set.in_region.push_back(region.contains(p));
  }
  if (const auto out = set.out_of_region(); out > 0)
    warn(std::to_string(out) + " of " + std::to_string(N) + " samples lie outside the operating region");
  return set;
}

/// Subset of columns, preserving provenance.
inline SampleSet select_columns(const SampleSet& s, const std::vector<Eigen::Index>& cols) {
  SampleSet out;
  out.seed = s.seed;
  out.model_id = s.model_id;
  out.h = s.h;
  const auto n = static_cast<Eigen::Index>(cols.size());
  out.X.resize(s.X.rows(), n);
  out.U.resize(s.U.rows(), n);
  out.W.resize(s.W.rows(), n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::Index k = cols[static_cast<std::size_t>(c)];
    out.X.col(c) = s.X.col(k);
    out.U.col(c) = s.U.col(k);
    out.W.col(c) = s.W.col(k);
    out.trajectory.push_back(s.trajectory[static_cast<std::size_t>(k)]);
    out.time_index.push_back(s.time_index[static_cast<std::size_t>(k)]);
    out.in_region.push_back(s.in_region[static_cast<std::size_t>(k)]);
  }
  return out;
}

/// Splits by source trajectory so that no trajectory contributes to both
/// parts: trajectories with id % stride == stride - 1 go to validation.
inline std::pair<SampleSet, SampleSet> split_by_trajectory(const SampleSet& s, int stride) {
  if (stride < 2) throw Error("split_by_trajectory: stride must be >= 2");
  std::vector<Eigen::Index> train, val;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    (s.trajectory[static_cast<std::size_t>(k)] % stride == stride - 1 ? val : train).push_back(k);
  return {select_columns(s, train), select_columns(s, val)};
}

}  // namespace lpvred

#endif  // LPVRED_SIM_HPP
