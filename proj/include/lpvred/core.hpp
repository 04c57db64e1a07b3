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
    Shared vocabulary: dimensions, state-space points, errors and warnings.
*/

#ifndef LPVRED_CORE_HPP
#define LPVRED_CORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lpvred {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

namespace detail {
inline std::atomic<bool>& warnings_enabled() {
  static std::atomic<bool> enabled{true};
  return enabled;
}
}  // namespace detail

/// Silences (or re-enables) diagnostics printed to std::clog.
inline void set_warnings_enabled(bool on) { detail::warnings_enabled() = on; }

inline void warn(const std::string& msg) {
  if (detail::warnings_enabled()) std::clog << "[lpvred] warning: " << msg << '\n';
}

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; callers write results by index, so output does not
/// depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      while (!failed) {
        const std::size_t i = next++;
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

struct ModelDims {
  int nx = 0;
  int nu = 0;
  int nw = 0;
  int ny = 0;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// One (x, u, w) tuple of a model.
struct StateSpacePoint {
  Vec x;
  Vec u;
  Vec w;

  bool finite() const { return x.allFinite() && u.allFinite() && w.allFinite(); }

  bool matches(const ModelDims& d) const {
    return x.size() == d.nx && u.size() == d.nu && w.size() == d.nw;
  }
};

/// Closed interval with the degenerate-width rule applied on demand.
struct Interval {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  double width() const { return hi - lo; }
};

/// Widths below this are treated as a single value.
inline constexpr double kDegenerateWidth = 1e-12;
/// Degenerate intervals are widened symmetrically to this width.
inline constexpr double kWidenedWidth = 1e-6;

inline Interval widen_degenerate(Interval iv) {
  if (iv.width() < kDegenerateWidth) {
    const double mid = 0.5 * (iv.lo + iv.hi);
    iv.lo = mid - 0.5 * kWidenedWidth;
    iv.hi = mid + 0.5 * kWidenedWidth;
  }
  return iv;
}

}  // namespace lpvred

#endif  // LPVRED_CORE_HPP
