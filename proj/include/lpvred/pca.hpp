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
    Row normalization of Pi_N and truncated-SVD scheduling reduction.

    With normalized data Pibar = S (Pi - c 1^T) and Pibar = U Sigma V^T,
    the reduced scheduling is thetahat = U_s^T S (Gamma - c) and the
    reconstruction Gammahat = S^-1 U_s thetahat + c.
*/

#ifndef LPVRED_PCA_HPP
#define LPVRED_PCA_HPP

#include "lpv.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <string>
#include <utility>

namespace lpvred {

enum class NormMode { Std, MinMax };

inline std::string to_string(NormMode m) { return m == NormMode::Std ? "std" : "minmax"; }

inline NormMode norm_mode_from_string(const std::string& s) {
  if (s == "std") return NormMode::Std;
  if (s == "minmax") return NormMode::MinMax;
  throw Error("unknown normalization '" + s + "' (expected std or minmax)");
}

struct Normalizer {
  NormMode mode = NormMode::Std;
  Vec center;
  Vec scale;

  Eigen::Index size() const { return center.size(); }

  static Normalizer identity(Eigen::Index n) {
    return {NormMode::Std, Vec::Zero(n), Vec::Ones(n)};
  }

  Mat normalize(const Mat& data) const {
    require_dims(data.rows() == size(), "Normalizer: row count mismatch");
    return scale.asDiagonal() * (data.colwise() - center);
  }
  Vec normalize(const Vec& v) const {
    require_dims(v.size() == size(), "Normalizer: length mismatch");
    return scale.cwiseProduct(v - center);
  }
  Mat denormalize(const Mat& data) const {
    require_dims(data.rows() == size(), "Normalizer: row count mismatch");
    return (scale.cwiseInverse().asDiagonal() * data).colwise() + center;
  }
  Vec denormalize(const Vec& v) const {
    require_dims(v.size() == size(), "Normalizer: length mismatch");
    return v.cwiseQuotient(scale) + center;
  }
};

/// Per-row centering and scaling. A row whose spread is below
/// kDegenerateWidth keeps scale 1.
inline Normalizer fit_normalizer(const Mat& Pi, NormMode mode) {
  if (Pi.rows() == 0 || Pi.cols() == 0) throw Error("fit_normalizer: empty dataset");
  if (Pi.cols() < 2) throw Error("fit_normalizer: need at least two samples");
  Normalizer n;
  n.mode = mode;
  n.center = Pi.rowwise().mean();
  n.scale = Vec::Ones(Pi.rows());
  for (Eigen::Index r = 0; r < Pi.rows(); ++r) {
    double spread;
    if (mode == NormMode::Std) {
      spread = std::sqrt((Pi.row(r).array() - n.center[r]).square().sum() / static_cast<double>(Pi.cols() - 1));
    } else {
      spread = Pi.row(r).maxCoeff() - Pi.row(r).minCoeff();
    }
    if (spread > kDegenerateWidth * std::max(1.0, std::abs(n.center[r]))) n.scale[r] = 1.0 / spread;
  }
  return n;
}

/// Full left singular basis of normalized data, with spectrum. Truncations
/// for any n_s share one decomposition.
struct PcaBasis {
  Normalizer normalizer;
  Mat U;          ///< n_Pi x min(n_Pi, N), columns sign-fixed
  Vec sigma;      ///< descending, nonnegative
  Eigen::Index samples = 0;
  bool gram = false;  ///< computed through the Gram matrix

  /// max(n_Pi, N) eps sigma_1. On the Gram route the same bound applies to
  /// the eigenvalues, so its square root is the singular-value threshold.
  double rank_threshold() const {
    if (sigma.size() == 0) return 0.0;
    const double t = static_cast<double>(std::max<Eigen::Index>(U.rows(), samples)) *
                     std::numeric_limits<double>::epsilon();
    return (gram ? std::sqrt(t) : t) * sigma[0];
  }
  int numerical_rank() const {
    const double tol = rank_threshold();
    int r = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
      if (sigma[i] > tol) ++r;
    return r;
  }
};

/// Largest-magnitude entry of every column made positive (first one on ties).
inline void fix_signs(Mat& U) {
  for (Eigen::Index c = 0; c < U.cols(); ++c) {
    Eigen::Index arg = 0;
    U.col(c).cwiseAbs().maxCoeff(&arg);
    if (U(arg, c) < 0) U.col(c) *= -1.0;
  }
}

/// Above this many samples the basis comes from the n_Pi x n_Pi Gram matrix.
inline constexpr Eigen::Index kGramThreshold = 100000;

inline PcaBasis fit_pca_basis(const Mat& Pi, const Normalizer& normalizer) {
  if (Pi.cols() == 0) throw Error("fit_pca: empty dataset");
  PcaBasis b;
  b.normalizer = normalizer;
  b.samples = Pi.cols();
  const Mat bar = normalizer.normalize(Pi);
  const Eigen::Index k = std::min(bar.rows(), bar.cols());
  if (bar.cols() > kGramThreshold) {
    b.gram = true;
    const Mat G = bar * bar.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    if (es.info() != Eigen::Success) throw Error("fit_pca: eigendecomposition failed");
    // Ascending order from the solver; reverse.
    const Eigen::Index n = G.rows();
    b.U.resize(n, k);
    b.sigma.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      b.U.col(i) = es.eigenvectors().col(n - 1 - i);
      b.sigma[i] = std::sqrt(std::max(0.0, es.eigenvalues()[n - 1 - i]));
    }
  } else {
    Eigen::BDCSVD<Mat> svd(bar, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success) throw Error("fit_pca: SVD failed");
    b.U = svd.matrixU().leftCols(k);
    b.sigma = svd.singularValues().head(k);
  }
  fix_signs(b.U);
  return b;
}

/// Truncated PCA reduction in the affine form
/// Mhat(thetahat) = Mhat0 + sum_i thetahat_i Mhat_i.
class PcaReduction final : public ReducedScheduling {
 public:
  PcaReduction(ModelPtr model, const PcaBasis& basis, GammaLayout layout, int n_s)
      : model_(std::move(model)), layout_(layout), normalizer_(basis.normalizer), sigma_(basis.sigma),
        samples_(basis.samples) {
    if (n_s < 1 || n_s > basis.U.cols())
      throw Error("fit_pca: n_s = " + std::to_string(n_s) + " outside [1, " + std::to_string(basis.U.cols()) + "]");
    require_dims(basis.U.rows() == layout_.size(), "fit_pca: basis does not match the Gamma layout");
    Us_ = basis.U.leftCols(n_s);
    build_lpv();
  }

  /// Rebuilds a reduction from stored parts (deserialization).
  PcaReduction(ModelPtr model, GammaLayout layout, Normalizer normalizer, Mat Us, Vec sigma, Eigen::Index samples)
      : model_(std::move(model)), layout_(layout), normalizer_(std::move(normalizer)), Us_(std::move(Us)),
        sigma_(std::move(sigma)), samples_(samples) {
    require_dims(Us_.rows() == layout_.size() && normalizer_.size() == layout_.size(),
                 "PcaReduction: stored arrays do not match the Gamma layout");
    build_lpv();
  }

  std::string method() const override { return "pca"; }
  int n_sched() const override { return static_cast<int>(Us_.cols()); }
  GammaLayout layout() const override { return layout_; }

  Vec project(const Vec& gamma) const { return Us_.transpose() * normalizer_.normalize(gamma); }
  Mat project(const Mat& Pi) const { return Us_.transpose() * normalizer_.normalize(Pi); }

  Vec reconstruct_gamma(const Vec& theta) const {
    require_dims(theta.size() == n_sched(), "reconstruct_gamma: thetahat has the wrong length");
    return normalizer_.denormalize(Vec(Us_ * theta));
  }
  Mat reconstruct(const Mat& theta) const {
    require_dims(theta.rows() == n_sched(), "reconstruct: thetahat has the wrong row count");
    return normalizer_.denormalize(Mat(Us_ * theta));
  }

  Vec theta_hat(const StateSpacePoint& pt) const override { return project(gamma_at(*model_, pt, layout_)); }
  Vec gamma_hat(const StateSpacePoint& pt) const override { return reconstruct_gamma(theta_hat(pt)); }
  const AffineLpvModel& lpv() const override { return lpv_; }
  void set_region(BoxRegion region) { lpv_.region = std::move(region); }

  const Normalizer& normalizer() const { return normalizer_; }
  const Mat& Us() const { return Us_; }
  const Vec& singular_values() const { return sigma_; }
  Eigen::Index training_samples() const { return samples_; }
  const ModelPtr& model() const { return model_; }

 private:
  void build_lpv() {
    const ModelDims d = model_->dims();
    lpv_.dims = d;
    lpv_.Mi.clear();
    // Blocks outside the layout come from the model's constant part.
    lpv_.M0 = constant_part(*model_).block_matrix();
    if (layout_.blocks == GammaBlocks::StateInput && d.nw > 0) lpv_.M0.block(0, d.nx + d.nu, d.nx, d.nw).setZero();
    lpv_.M0.topLeftCorner(layout_.rows(), layout_.cols()) = unvec_gamma(normalizer_.center, layout_);
    const Vec inv = normalizer_.scale.cwiseInverse();
    for (Eigen::Index i = 0; i < Us_.cols(); ++i) {
      Mat Mi = Mat::Zero(lpv_.M0.rows(), lpv_.M0.cols());
      Mi.topLeftCorner(layout_.rows(), layout_.cols()) = unvec_gamma(Vec(inv.cwiseProduct(Us_.col(i))), layout_);
      lpv_.Mi.push_back(std::move(Mi));
    }
  }

  ModelPtr model_;
  GammaLayout layout_;
  Normalizer normalizer_;
  Mat Us_;
  Vec sigma_;
  Eigen::Index samples_ = 0;
  AffineLpvModel lpv_;
};

inline PcaReduction fit_pca(ModelPtr model, const VariationDataset& ds, const Normalizer& normalizer, int n_s) {
  return PcaReduction(std::move(model), fit_pca_basis(ds.Pi, normalizer), ds.layout, n_s);
}

/// Singular values with their cumulative energy fraction, as a table.
struct SpectrumRow {
  int index;
  double sigma;
  double energy;
};

inline std::vector<SpectrumRow> spectrum(const PcaBasis& basis) {
  std::vector<SpectrumRow> rows;
  const double total = basis.sigma.squaredNorm();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < basis.sigma.size(); ++i) {
    acc += basis.sigma[i] * basis.sigma[i];
    rows.push_back({static_cast<int>(i + 1), basis.sigma[i], total > 0 ? acc / total : 1.0});
  }
  return rows;
}

}  // namespace lpvred

#endif  // LPVRED_PCA_HPP
