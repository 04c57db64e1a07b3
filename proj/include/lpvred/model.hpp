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
    Nonlinear models in factorized form and the full scheduling map obtained
    by extracting every varying matrix entry as its own scheduling variable.

    A model supplies two independent routes to its dynamics: the direct
    right-hand side f(x,u,w) and the factorization
    f = A(x,u,w) x + Bu(x,u,w) u + Bw(x,u,w) w. The varying entries of the
    factorization are listed by the model; everything else is constant.
*/

#ifndef LPVRED_MODEL_HPP
#define LPVRED_MODEL_HPP

#include "core.hpp"
#include "matrices.hpp"

#include <json.hpp>

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace lpvred {

enum class Block { A, Bu, Bw };

inline const char* to_string(Block b) {
  switch (b) {
    case Block::A: return "A";
    case Block::Bu: return "Bu";
    case Block::Bw: return "Bw";
  }
  return "?";
}

/// One scalar nonlinearity: entry (row, col) of a factorization block.
struct SchedulingEntry {
  Block block = Block::A;
  int row = 0;
  int col = 0;
  std::string label;
};

/// Per-coordinate bounds of X x U x W.
struct OperatingRegion {
  std::vector<Interval> x, u, w;

  bool contains(const StateSpacePoint& pt, double tol = 1e-9) const {
    auto in = [tol](const std::vector<Interval>& b, const Vec& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!b[static_cast<size_t>(i)].contains(v[i], tol * (1.0 + std::abs(v[i])))) return false;
      return true;
    };
    return in(x, pt.x) && in(u, pt.u) && in(w, pt.w);
  }

  template <class Rng>
  StateSpacePoint sample(Rng& rng) const {
    auto draw = [&rng](const std::vector<Interval>& b) {
      Vec v(static_cast<Eigen::Index>(b.size()));
      for (size_t i = 0; i < b.size(); ++i) {
        std::uniform_real_distribution<double> d(b[i].lo, b[i].hi);
        v[static_cast<Eigen::Index>(i)] = d(rng);
      }
      return v;
    };
    StateSpacePoint p;
    p.x = draw(x);
    p.u = draw(u);
    p.w = draw(w);
    return p;
  }

  StateSpacePoint center() const {
    auto mid = [](const std::vector<Interval>& b) {
      Vec v(static_cast<Eigen::Index>(b.size()));
      for (size_t i = 0; i < b.size(); ++i) v[static_cast<Eigen::Index>(i)] = 0.5 * (b[i].lo + b[i].hi);
      return v;
    };
    return {mid(x), mid(u), mid(w)};
  }

  /// Flattened bounds in (x, u, w) order.
  std::vector<Interval> flat() const {
    std::vector<Interval> all(x);
    all.insert(all.end(), u.begin(), u.end());
    all.insert(all.end(), w.begin(), w.end());
    return all;
  }
};

class FactorizedModel {
 public:
  virtual ~FactorizedModel() = default;

  virtual std::string id() const = 0;
  virtual ModelDims dims() const = 0;
  virtual OperatingRegion operating_region() const = 0;

  /// Direct right-hand side; does not go through the factorization.
  virtual Vec f(const StateSpacePoint& pt) const = 0;
  virtual FactorizedMatrices factorize(const StateSpacePoint& pt) const = 0;

  /// Entries of A, Bu, Bw that vary over the operating region, in
  /// column-major order of the block matrix [A Bu Bw].
  virtual std::vector<SchedulingEntry> scheduling_entries() const = 0;

  /// Indices of Euler-angle states (expanded to sin/cos by the DNN features).
  virtual std::vector<int> angular_states() const { return {}; }

  /// Minimal scheduling dimension when known by construction, else -1.
  virtual int minimal_scheduling_dim() const { return -1; }

  /// A representative in-region point for building the constant part.
  virtual StateSpacePoint reference_point() const { return operating_region().center(); }

  /// Initial state of a typical trajectory. Defaults to the middle half of
  /// the state bounds.
  virtual Vec sample_initial_state(std::mt19937_64& rng) const {
    const OperatingRegion r = operating_region();
    Vec x(static_cast<Eigen::Index>(r.x.size()));
    for (size_t i = 0; i < r.x.size(); ++i) {
      const double mid = 0.5 * (r.x[i].lo + r.x[i].hi), half = 0.25 * r.x[i].width();
      std::uniform_real_distribution<double> d(mid - half, mid + half);
      x[static_cast<Eigen::Index>(i)] = d(rng);
    }
    return x;
  }

  virtual nlohmann::json parameters() const { return nlohmann::json::object(); }
};

using ModelPtr = std::shared_ptr<const FactorizedModel>;

inline void check_point(const FactorizedModel& model, const StateSpacePoint& pt) {
  const ModelDims d = model.dims();
  require_dims(pt.matches(d), "point dimensions (" + std::to_string(pt.x.size()) + "," +
                                  std::to_string(pt.u.size()) + "," + std::to_string(pt.w.size()) +
                                  ") do not match model '" + model.id() + "'");
}

/// f(x,u,w) with dimension and finiteness checks.
inline Vec evaluate_f(const FactorizedModel& model, const StateSpacePoint& pt) {
  check_point(model, pt);
  Vec xdot = model.f(pt);
  if (!xdot.allFinite())
    throw Error("non-finite state derivative from model '" + model.id() +
                "'; the point is likely far outside the operating region");
  return xdot;
}

/// A x + Bu u + Bw w from the factorization.
inline Vec factorized_derivative(const FactorizedModel& model, const StateSpacePoint& pt) {
  check_point(model, pt);
  const FactorizedMatrices m = model.factorize(pt);
  Vec xdot = m.A * pt.x;
  if (pt.u.size() > 0) xdot += m.Bu * pt.u;
  if (pt.w.size() > 0) xdot += m.Bw * pt.w;
  return xdot;
}

inline int full_scheduling_dim(const FactorizedModel& model) {
  return static_cast<int>(model.scheduling_entries().size());
}

namespace detail {
inline double& block_entry(FactorizedMatrices& m, const SchedulingEntry& e) {
  switch (e.block) {
    case Block::A: return m.A(e.row, e.col);
    case Block::Bu: return m.Bu(e.row, e.col);
    case Block::Bw: return m.Bw(e.row, e.col);
  }
  throw Error("invalid block");
}
inline double block_entry(const FactorizedMatrices& m, const SchedulingEntry& e) {
  return block_entry(const_cast<FactorizedMatrices&>(m), e);
}
}  // namespace detail

/// theta = psi(x,u,w): every varying factorization entry, in declaration order.
inline Vec extract_full_scheduling(const FactorizedModel& model, const StateSpacePoint& pt) {
  check_point(model, pt);
  const FactorizedMatrices m = model.factorize(pt);
  const auto entries = model.scheduling_entries();
  Vec theta(static_cast<Eigen::Index>(entries.size()));
  for (size_t i = 0; i < entries.size(); ++i)
    theta[static_cast<Eigen::Index>(i)] = detail::block_entry(m, entries[i]);
  return theta;
}

/// Constant part of the factorization: the varying entries zeroed.
inline FactorizedMatrices constant_part(const FactorizedModel& model) {
  FactorizedMatrices m = model.factorize(model.reference_point());
  for (const auto& e : model.scheduling_entries()) detail::block_entry(m, e) = 0.0;
  return m;
}

/// Extremes of every psi component over a nested grid of the operating
/// region plus seeded random samples. Grid levels are lo + k (hi-lo)/g,
/// k = 0..g, so doubling g only adds points. When the full tensor grid is
/// too large, axis sweeps through a fixed set of random base points are
/// used instead. Degenerate intervals are widened.
inline std::vector<Interval> full_scheduling_region(const FactorizedModel& model, int grid_density,
                                                    int random_samples = 2000,
                                                    std::uint64_t seed = 7,
                                                    long tensor_budget = 200000) {
  if (grid_density < 2) throw Error("full_scheduling_region: grid_density must be >= 2");
  const OperatingRegion region = model.operating_region();
  const ModelDims d = model.dims();
  const std::vector<Interval> bounds = region.flat();
  const int dim = static_cast<int>(bounds.size());
  const int n_theta = full_scheduling_dim(model);
  std::vector<Interval> box(static_cast<size_t>(n_theta));

  auto to_point = [&d](const Vec& z) {
    return StateSpacePoint{z.head(d.nx), z.segment(d.nx, d.nu), z.tail(d.nw)};
  };
  auto level = [&bounds, grid_density](int axis, int k) {
    const Interval& b = bounds[static_cast<size_t>(axis)];
    return b.lo + (b.hi - b.lo) * static_cast<double>(k) / grid_density;
  };
  auto visit = [&](const Vec& z) {
    const StateSpacePoint pt = to_point(z);
    Vec th;
    try {
      th = extract_full_scheduling(model, pt);
    } catch (const Error&) {
      return;
    }
    if (!th.allFinite()) return;
    for (int i = 0; i < n_theta; ++i) box[static_cast<size_t>(i)].include(th[i]);
  };

  const double tensor_size = std::pow(static_cast<double>(grid_density + 1), dim);
  std::mt19937_64 rng(seed);
  std::vector<Vec> bases;
  for (int s = 0; s < random_samples; ++s) {
    Vec z(dim);
    for (int a = 0; a < dim; ++a) {
      std::uniform_real_distribution<double> u(bounds[static_cast<size_t>(a)].lo,
                                               bounds[static_cast<size_t>(a)].hi);
      z[a] = u(rng);
    }
    bases.push_back(z);
  }
  for (const Vec& z : bases) visit(z);

  if (tensor_size <= static_cast<double>(tensor_budget)) {
    std::vector<int> idx(static_cast<size_t>(dim), 0);
    Vec z(dim);
    while (true) {
      for (int a = 0; a < dim; ++a) z[a] = level(a, idx[static_cast<size_t>(a)]);
      visit(z);
      int a = 0;
      while (a < dim && ++idx[static_cast<size_t>(a)] > grid_density) idx[static_cast<size_t>(a++)] = 0;
      if (a == dim) break;
    }
  } else {
    const size_t n_sweep = std::min<size_t>(bases.size(), 500);
    for (size_t s = 0; s < n_sweep; ++s) {
      for (int a = 0; a < dim; ++a) {
        Vec z = bases[s];
        for (int k = 0; k <= grid_density; ++k) {
          z[a] = level(a, k);
          visit(z);
        }
      }
    }
  }
  for (auto& iv : box) iv = widen_degenerate(iv);
  return box;
}

inline nlohmann::json model_metadata(const FactorizedModel& model) {
  const ModelDims d = model.dims();
  const OperatingRegion r = model.operating_region();
  auto bounds = [](const std::vector<Interval>& b) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& iv : b) arr.push_back({iv.lo, iv.hi});
    return arr;
  };
  int n_state_input = 0;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : model.scheduling_entries()) {
    if (e.block != Block::Bw) ++n_state_input;
    entries.push_back({{"block", to_string(e.block)}, {"row", e.row}, {"col", e.col}, {"label", e.label}});
  }
  return {{"id", model.id()},
          {"dims", {{"nx", d.nx}, {"nu", d.nu}, {"nw", d.nw}, {"ny", d.ny}}},
          {"n_theta", full_scheduling_dim(model)},
          {"n_theta_state_input", n_state_input},
          {"minimal_scheduling_dim", model.minimal_scheduling_dim()},
          {"region", {{"x", bounds(r.x)}, {"u", bounds(r.u)}, {"w", bounds(r.w)}}},
          {"scheduling_entries", entries},
          {"parameters", model.parameters()}};
}

}  // namespace lpvred

#endif  // LPVRED_MODEL_HPP
