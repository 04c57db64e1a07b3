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

#ifndef LPVRED_BOX_HPP
#define LPVRED_BOX_HPP

#include "core.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace lpvred {

/// Box lo <= R^T theta <= hi. R maps box-frame coordinates to the
/// scheduling frame; identity for an axis-aligned box.
struct BoxRegion {
  Vec lo, hi;
  Mat rotation;
  std::string method = "axis_aligned";
  std::string note;  ///< diagnostic (fallbacks, widening)

  int dim() const { return static_cast<int>(lo.size()); }

  static BoxRegion axis_aligned(Vec lo, Vec hi) {
    BoxRegion b;
    b.rotation = Mat::Identity(lo.size(), lo.size());
    b.lo = std::move(lo);
    b.hi = std::move(hi);
    return b;
  }

  Vec to_box_frame(const Vec& theta) const { return rotation.transpose() * theta; }

  bool contains(const Vec& theta, double tol = 1e-9) const {
    const Vec b = to_box_frame(theta);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double slack = tol * (1.0 + std::abs(b[i]));
      if (b[i] < lo[i] - slack || b[i] > hi[i] + slack) return false;
    }
    return true;
  }

  double volume() const { return (hi - lo).prod(); }

  /// The 2^dim corners in the scheduling frame, one per column.
  Mat corners() const {
    const int d = dim();
    const Eigen::Index n = Eigen::Index{1} << d;
    Mat out(d, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      Vec b(d);
      for (int i = 0; i < d; ++i) b[i] = ((c >> i) & 1) ? hi[i] : lo[i];
      out.col(c) = rotation * b;
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json rot = nlohmann::json::array();
    for (Eigen::Index r = 0; r < rotation.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < rotation.cols(); ++c) row.push_back(rotation(r, c));
      rot.push_back(row);
    }
    return {{"type", "box"},
            {"method", method},
            {"lo", std::vector<double>(lo.data(), lo.data() + lo.size())},
            {"hi", std::vector<double>(hi.data(), hi.data() + hi.size())},
            {"rotation", rot},
            {"volume", volume()},
            {"note", note}};
  }

  static BoxRegion from_json(const nlohmann::json& j) {
    BoxRegion b;
    const auto lo = j.at("lo").get<std::vector<double>>();
    const auto hi = j.at("hi").get<std::vector<double>>();
    require_dims(lo.size() == hi.size(), "box: lo/hi length mismatch");
    const auto n = static_cast<Eigen::Index>(lo.size());
    b.lo = Eigen::Map<const Vec>(lo.data(), n);
    b.hi = Eigen::Map<const Vec>(hi.data(), n);
    b.rotation = Mat::Identity(n, n);
    if (j.contains("rotation")) {
      const auto& rot = j.at("rotation");
      require_dims(static_cast<Eigen::Index>(rot.size()) == n, "box: rotation has wrong size");
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) b.rotation(r, c) = rot.at(r).at(c).get<double>();
    }
    b.method = j.value("method", "axis_aligned");
    b.note = j.value("note", "");
    return b;
  }
};

}  // namespace lpvred

#endif  // LPVRED_BOX_HPP
