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

#ifndef LPVRED_MODELS_ANALYTIC_BENCHMARK_HPP
#define LPVRED_MODELS_ANALYTIC_BENCHMARK_HPP

#include "../model.hpp"

#include <numbers>

namespace lpvred {

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

/**
    Three-state, one-input pendulum-like system

        x1' = x2
        x2' = -sin(x1) + cos(x1) u
        x3' = -x3 + sinc(x1) x2

    factorized with A(2,1) = -sinc(x1), A(3,2) = sinc(x1), Bu(2) = cos(x1).
    The three extracted scheduling variables span a rank-2 variation set
    because A(2,1) = -A(3,2), so the minimal scheduling dimension is 2.
*/
class AnalyticBenchmarkModel final : public FactorizedModel {
 public:
  std::string id() const override { return "analytic"; }
  ModelDims dims() const override { return {3, 1, 0, 3}; }

  OperatingRegion operating_region() const override {
    OperatingRegion r;
    r.x = {{-std::numbers::pi, std::numbers::pi}, {-2.0, 2.0}, {-2.0, 2.0}};
    r.u = {{-1.0, 1.0}};
    return r;
  }

  Vec f(const StateSpacePoint& pt) const override {
    const double x1 = pt.x[0], x2 = pt.x[1], x3 = pt.x[2], u = pt.u[0];
    Vec xdot(3);
    xdot << x2, -std::sin(x1) + std::cos(x1) * u, -x3 + sinc(x1) * x2;
    return xdot;
  }

  FactorizedMatrices factorize(const StateSpacePoint& pt) const override {
    const double s = sinc(pt.x[0]), c = std::cos(pt.x[0]);
    FactorizedMatrices m;
    m.A.resize(3, 3);
    m.A << 0, 1, 0,  //
        -s, 0, 0,    //
        0, s, -1;
    m.Bu.resize(3, 1);
    m.Bu << 0, c, 0;
    m.Bw = Mat::Zero(3, 0);
    m.C = Mat::Identity(3, 3);
    m.Du = Mat::Zero(3, 1);
    m.Dw = Mat::Zero(3, 0);
    return m;
  }

  std::vector<SchedulingEntry> scheduling_entries() const override {
    return {{Block::A, 1, 0, "-sinc(x1)"}, {Block::A, 2, 1, "sinc(x1)"}, {Block::Bu, 1, 0, "cos(x1)"}};
  }

  int minimal_scheduling_dim() const override { return 2; }

  StateSpacePoint reference_point() const override { return {Vec::Zero(3), Vec::Zero(1), Vec::Zero(0)}; }
};

}  // namespace lpvred

#endif  // LPVRED_MODELS_ANALYTIC_BENCHMARK_HPP
