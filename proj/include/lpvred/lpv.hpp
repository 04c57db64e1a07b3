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
    Affine LPV models M(theta) = M0 + sum_i theta_i M_i, the variation data
    matrix Pi_N, and the scheduling-reduction interface shared by the
    full-order embedding and the PCA and DNN reductions.
*/

#ifndef LPVRED_LPV_HPP
#define LPVRED_LPV_HPP

#include "box.hpp"
#include "model.hpp"
#include "sim.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace lpvred {

struct AffineLpvModel {
  ModelDims dims;
  Mat M0;               ///< (nx+ny) x (nx+nu+nw)
  std::vector<Mat> Mi;  ///< one coefficient matrix per scheduling variable
  std::optional<BoxRegion> region;

  int n_sched() const { return static_cast<int>(Mi.size()); }

  Mat matrix(const Vec& theta) const {
    require_dims(theta.size() == n_sched(), "AffineLpvModel: scheduling vector has length " +
                                                std::to_string(theta.size()) + ", expected " +
                                                std::to_string(n_sched()));
    Mat M = M0;
    for (int i = 0; i < n_sched(); ++i) M.noalias() += theta[i] * Mi[static_cast<size_t>(i)];
    return M;
  }
};

struct LpvOutput {
  Vec xdot;
  Vec y;
};

/// xdot = A(theta) x + Bu(theta) u + Bw(theta) w, y = C(theta) x + ...
/// Scheduling values outside the region are evaluated with a warning.
inline LpvOutput evaluate_lpv(const AffineLpvModel& model, const Vec& theta, const Vec& x,
                              const Vec& u, const Vec& w) {
  const ModelDims& d = model.dims;
  require_dims(x.size() == d.nx && u.size() == d.nu && w.size() == d.nw,
               "evaluate_lpv: signal dimensions do not match the model");
  if (model.region && !model.region->contains(theta)) warn("evaluate_lpv: scheduling outside region");
  const Mat M = model.matrix(theta);
  Vec z(d.nx + d.nu + d.nw);
  z << x, u, w;
  const Vec out = M * z;
  return {out.head(d.nx), out.segment(d.nx, d.ny)};
}

/// Gamma of the factorized matrices at a point.
inline Vec gamma_at(const FactorizedModel& model, const StateSpacePoint& pt, const GammaLayout& layout) {
  check_point(model, pt);
  return model.factorize(pt).gamma(layout);
}

/// Pi_N: one Gamma column per sample. Rows that never change over the
/// dataset are kept; `varying_rows` lists the others.
struct VariationDataset {
  GammaLayout layout;
  Mat Pi;
  std::vector<Eigen::Index> varying_rows;
  std::vector<Eigen::Index> sample_index;  ///< Pi column -> SampleSet column
  std::size_t skipped = 0;

  Eigen::Index n_pi() const { return Pi.rows(); }
  Eigen::Index n_samples() const { return Pi.cols(); }
  Eigen::Index n_varying() const { return static_cast<Eigen::Index>(varying_rows.size()); }
};

/// Row indices whose values are not all identical.
inline std::vector<Eigen::Index> varying_rows_of(const Mat& Pi) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < Pi.rows(); ++r)
    if (Pi.cols() > 0 && (Pi.row(r).array() != Pi(r, 0)).any()) rows.push_back(r);
  return rows;
}

inline VariationDataset build_variation_dataset(const FactorizedModel& model, const SampleSet& samples,
                                                GammaBlocks blocks = GammaBlocks::StateInput) {
  VariationDataset ds;
  ds.layout = {model.dims(), blocks};
  std::vector<Vec> cols;
  for (Eigen::Index k = 0; k < samples.size(); ++k) {
    Vec g;
    try {
      g = gamma_at(model, samples.point(k), ds.layout);
    } catch (const Error&) {
      ++ds.skipped;
      continue;
    }
    if (!g.allFinite()) {
      ++ds.skipped;
      continue;
    }
    cols.push_back(std::move(g));
    ds.sample_index.push_back(k);
  }
  if (ds.skipped > 0)
    warn("build_variation_dataset: skipped " + std::to_string(ds.skipped) + " samples that failed to evaluate");
  if (cols.empty()) throw Error("build_variation_dataset: no usable samples");
  ds.Pi.resize(ds.layout.size(), static_cast<Eigen::Index>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) ds.Pi.col(static_cast<Eigen::Index>(c)) = cols[c];
  ds.varying_rows = varying_rows_of(ds.Pi);
  return ds;
}

/// Something that maps (x,u,w) to a scheduling vector and reconstructs the
/// model matrices from it.
class ReducedScheduling {
 public:
  virtual ~ReducedScheduling() = default;

  virtual std::string method() const = 0;
  virtual int n_sched() const = 0;
  virtual GammaLayout layout() const = 0;
  virtual Vec theta_hat(const StateSpacePoint& pt) const = 0;
  /// Reconstructed Gamma at a point (includes any input-dependent terms).
  virtual Vec gamma_hat(const StateSpacePoint& pt) const = 0;
  /// The exported affine model in theta_hat.
  virtual const AffineLpvModel& lpv() const = 0;
};

/// xdot of the reduced model at a point. Blocks outside the reduction's
/// Gamma layout (Bw under the state/input layout) do not contribute.
inline Vec reduced_derivative(const ReducedScheduling& red, const StateSpacePoint& pt) {
  const GammaLayout lay = red.layout();
  const Mat M = unvec_gamma(red.gamma_hat(pt), lay);
  const ModelDims& d = lay.dims;
  Vec xdot = M.block(0, 0, d.nx, d.nx) * pt.x;
  if (d.nu > 0) xdot += M.block(0, d.nx, d.nx, d.nu) * pt.u;
  if (lay.blocks == GammaBlocks::All && d.nw > 0) xdot += M.block(0, d.nx + d.nu, d.nx, d.nw) * pt.w;
  return xdot;
}

/// The exact full-order embedding: theta = psi(x,u,w), one scheduling
/// variable per varying entry.
class FullOrderEmbedding final : public ReducedScheduling {
 public:
  explicit FullOrderEmbedding(ModelPtr model) : model_(std::move(model)) {
    const ModelDims d = model_->dims();
    lpv_.dims = d;
    lpv_.M0 = constant_part(*model_).block_matrix();
    for (const auto& e : model_->scheduling_entries()) {
      Mat E = Mat::Zero(lpv_.M0.rows(), lpv_.M0.cols());
      const int col = e.col + (e.block == Block::Bu ? d.nx : 0) + (e.block == Block::Bw ? d.nx + d.nu : 0);
      E(e.row, col) = 1.0;
      lpv_.Mi.push_back(std::move(E));
    }
  }

  void set_region(BoxRegion region) { lpv_.region = std::move(region); }

  std::string method() const override { return "full"; }
  int n_sched() const override { return lpv_.n_sched(); }
  GammaLayout layout() const override { return {model_->dims(), GammaBlocks::All}; }
  Vec theta_hat(const StateSpacePoint& pt) const override { return extract_full_scheduling(*model_, pt); }
  Vec gamma_hat(const StateSpacePoint& pt) const override {
    const Mat M = lpv_.matrix(theta_hat(pt));
    return Eigen::Map<const Vec>(M.data(), M.size());
  }
  const AffineLpvModel& lpv() const override { return lpv_; }

 private:
  ModelPtr model_;
  AffineLpvModel lpv_;
};

}  // namespace lpvred

#endif  // LPVRED_LPV_HPP
