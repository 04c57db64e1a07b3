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
    Learned scheduling reduction: an MLP encoder whose last layer is the
    reduced scheduling vector thetahat, followed by an affine decoder to the
    varying rows of Gamma.

        h_0 = features,  h_l = g(W_l h_{l-1} + b_l),  thetahat = h_L
        Gammahat = W_G thetahat + b_G  (+ W_B features with the bypass)

    All parameters live in one flat vector so the optimizer and the
    gradient check work on plain arrays.
*/

#ifndef LPVRED_DNN_HPP
#define LPVRED_DNN_HPP

#include "pca.hpp"

#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace lpvred {

/// Network input for a state/input pair. Angular states are replaced by
/// their sines then cosines, placed where the first angular state sits.
inline Vec feature_map(const std::vector<int>& angular, const Vec& x, const Vec& u) {
  const auto nx = static_cast<int>(x.size());
  std::vector<bool> is_angle(static_cast<size_t>(nx), false);
  for (int a : angular) {
    require_dims(a >= 0 && a < nx, "feature_map: angular index outside the state");
    is_angle[static_cast<size_t>(a)] = true;
  }
  const auto na = static_cast<Eigen::Index>(angular.size());
  Vec out(nx + na + u.size());
  Eigen::Index k = 0;
  bool emitted = false;
  for (int i = 0; i < nx; ++i) {
    if (!is_angle[static_cast<size_t>(i)]) {
      out[k++] = x[i];
    } else if (!emitted) {
      for (int a : angular) out[k++] = std::sin(x[a]);
      for (int a : angular) out[k++] = std::cos(x[a]);
      emitted = true;
    }
  }
  out.segment(k, u.size()) = u;
  return out;
}

inline Vec feature_map(const FactorizedModel& model, const Vec& x, const Vec& u) {
  return feature_map(model.angular_states(), x, u);
}

inline int feature_dim(const FactorizedModel& model) {
  const ModelDims d = model.dims();
  return d.nx + static_cast<int>(model.angular_states().size()) + d.nu;
}

enum class Activation { Tanh, Identity };

struct MlpShape {
  int n_in = 0;
  std::vector<int> hidden;  ///< widths of the layers before thetahat
  int n_theta = 0;
  int n_out = 0;
  bool bypass = false;
  Activation activation = Activation::Tanh;

  /// Encoder layer widths including the input and thetahat.
  std::vector<int> widths() const {
    std::vector<int> w{n_in};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(n_theta);
    return w;
  }
};

class MlpNetwork {
 public:
  using MapMat = Eigen::Map<Mat>;
  using CMapMat = Eigen::Map<const Mat>;
  using MapVec = Eigen::Map<Vec>;
  using CMapVec = Eigen::Map<const Vec>;

  MlpNetwork() = default;

  explicit MlpNetwork(MlpShape shape) : shape_(std::move(shape)) {
    if (shape_.n_in < 1 || shape_.n_theta < 1 || shape_.n_out < 1) throw Error("MlpNetwork: widths must be positive");
    for (int h : shape_.hidden)
      if (h < 1) throw Error("MlpNetwork: hidden widths must be positive");
    Eigen::Index off = 0;
    const auto w = shape_.widths();
    for (size_t l = 1; l < w.size(); ++l) {
      layers_.push_back({w[l], w[l - 1], off, off + Eigen::Index{w[l]} * w[l - 1]});
      off = layers_.back().b_off + w[l];
    }
    decoder_ = {shape_.n_out, shape_.n_theta, off, off + Eigen::Index{shape_.n_out} * shape_.n_theta};
    off = decoder_.b_off + shape_.n_out;
    if (shape_.bypass) {
      bypass_off_ = off;
      off += Eigen::Index{shape_.n_out} * shape_.n_in;
    }
    params_ = Vec::Zero(off);
  }

  const MlpShape& shape() const { return shape_; }
  int n_layers() const { return static_cast<int>(layers_.size()); }
  Eigen::Index n_params() const { return params_.size(); }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  MapMat W(int l) { return {params_.data() + layers_[l].w_off, layers_[l].rows, layers_[l].cols}; }
  CMapMat W(int l) const { return {params_.data() + layers_[l].w_off, layers_[l].rows, layers_[l].cols}; }
  MapVec b(int l) { return {params_.data() + layers_[l].b_off, layers_[l].rows}; }
  CMapVec b(int l) const { return {params_.data() + layers_[l].b_off, layers_[l].rows}; }
  MapMat W_dec() { return {params_.data() + decoder_.w_off, decoder_.rows, decoder_.cols}; }
  CMapMat W_dec() const { return {params_.data() + decoder_.w_off, decoder_.rows, decoder_.cols}; }
  MapVec b_dec() { return {params_.data() + decoder_.b_off, decoder_.rows}; }
  CMapVec b_dec() const { return {params_.data() + decoder_.b_off, decoder_.rows}; }
  MapMat W_bypass() {
    require_bypass();
    return {params_.data() + bypass_off_, shape_.n_out, shape_.n_in};
  }
  CMapMat W_bypass() const {
    require_bypass();
    return {params_.data() + bypass_off_, shape_.n_out, shape_.n_in};
  }

  /// Glorot-uniform weights, zero biases.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    params_.setZero();
    auto fill = [&](MapMat m) {
      const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      std::uniform_real_distribution<double> dist(-a, a);
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
    };
    for (int l = 0; l < n_layers(); ++l) fill(W(l));
    fill(W_dec());
    if (shape_.bypass) fill(W_bypass());
  }

  struct Cache {
    std::vector<Mat> h;  ///< h[0] = input, h[L] = thetahat
    Mat out;
  };

  /// Batch forward pass, one sample per column.
  Cache forward(const Mat& X) const {
    require_dims(X.rows() == shape_.n_in, "MlpNetwork: feature length " + std::to_string(X.rows()) +
                                              " does not match input width " + std::to_string(shape_.n_in));
    Cache c;
    c.h.reserve(layers_.size() + 1);
    c.h.push_back(X);
    for (int l = 0; l < n_layers(); ++l) {
      Mat z = W(l) * c.h.back();
      z.colwise() += b(l);
      if (shape_.activation == Activation::Tanh) z = z.array().tanh().matrix();
      c.h.push_back(std::move(z));
    }
    c.out = W_dec() * c.h.back();
    c.out.colwise() += b_dec();
    if (shape_.bypass) c.out.noalias() += W_bypass() * X;
    return c;
  }

  Mat encode(const Mat& X) const { return forward(X).h.back(); }
  Mat predict(const Mat& X) const { return forward(X).out; }

  /// Affine decode of thetahat alone (bypass excluded).
  Mat decode(const Mat& theta) const {
    require_dims(theta.rows() == shape_.n_theta, "MlpNetwork: thetahat has the wrong length");
    Mat out = W_dec() * theta;
    out.colwise() += b_dec();
    return out;
  }

  /// Sum of squared weights (biases excluded).
  double weight_norm2() const {
    double s = 0;
    for (int l = 0; l < n_layers(); ++l) s += W(l).squaredNorm();
    s += W_dec().squaredNorm();
    if (shape_.bypass) s += W_bypass().squaredNorm();
    return s;
  }

  /// (1/B) sum_j |out_j - Y_j|^2 + l2 * |W|^2 and, if grad is non-null,
  /// its gradient with respect to params().
  double loss(const Mat& X, const Mat& Y, double l2, Vec* grad = nullptr) const {
    require_dims(Y.rows() == shape_.n_out && Y.cols() == X.cols(), "MlpNetwork: target shape mismatch");
    const Cache c = forward(X);
    const double inv_b = 1.0 / static_cast<double>(X.cols());
    const Mat diff = c.out - Y;
    const double value = diff.squaredNorm() * inv_b + l2 * weight_norm2();
    if (!grad) return value;

    grad->setZero(n_params());
    auto gW = [&](const Layer& L) { return MapMat(grad->data() + L.w_off, L.rows, L.cols); };
    auto gb = [&](const Layer& L) { return MapVec(grad->data() + L.b_off, L.rows); };

    const Mat d_out = (2.0 * inv_b) * diff;
    gW(decoder_).noalias() = d_out * c.h.back().transpose() + 2.0 * l2 * W_dec();
    gb(decoder_) = d_out.rowwise().sum();
    if (shape_.bypass) {
      MapMat(grad->data() + bypass_off_, shape_.n_out, shape_.n_in).noalias() =
          d_out * X.transpose() + 2.0 * l2 * W_bypass();
    }
    Mat d_h = W_dec().transpose() * d_out;
    for (int l = n_layers() - 1; l >= 0; --l) {
      const Layer& L = layers_[static_cast<size_t>(l)];
      const Mat& h = c.h[static_cast<size_t>(l) + 1];
      Mat d_z = shape_.activation == Activation::Tanh ? Mat(d_h.array() * (1.0 - h.array().square())) : d_h;
      gW(L).noalias() = d_z * c.h[static_cast<size_t>(l)].transpose() + 2.0 * l2 * W(l);
      gb(L) = d_z.rowwise().sum();
      if (l > 0) d_h = W(l).transpose() * d_z;
    }
    return value;
  }

 private:
  struct Layer {
    Eigen::Index rows, cols, w_off, b_off;
  };

  void require_bypass() const {
    if (!shape_.bypass) throw Error("MlpNetwork: network has no bypass");
  }

  MlpShape shape_;
  std::vector<Layer> layers_;
  Layer decoder_{};
  Eigen::Index bypass_off_ = -1;
  Vec params_;
};

struct AdamState {
  Vec m, v;
  long long t = 0;
};

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update.
inline void adam_step(Vec& params, const Vec& grads, AdamState& st, const AdamParams& p) {
  require_dims(params.size() == grads.size(), "adam_step: gradient length mismatch");
  if (st.m.size() != params.size()) {
    st.m = Vec::Zero(params.size());
    st.v = Vec::Zero(params.size());
    st.t = 0;
  }
  ++st.t;
  st.m = p.beta1 * st.m + (1.0 - p.beta1) * grads;
  st.v = p.beta2 * st.v + (1.0 - p.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(p.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(p.beta2, static_cast<double>(st.t));
  params.array() -= p.lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + p.eps);
}

struct TrainConfig {
  double learning_rate = 1e-5;
  int batch_size = 128;
  int epochs = 200;
  double l2 = 1e-4;
  std::uint64_t seed = 1;
  int patience = 20;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::vector<int> hidden{64, 64, 64, 64};
  bool bypass = false;
  NormMode norm = NormMode::Std;

  void validate() const {
    if (!(learning_rate > 0) || batch_size < 1 || epochs < 1 || l2 < 0 || patience < 1 || !(beta1 > 0 && beta1 < 1) ||
        !(beta2 > 0 && beta2 < 1) || !(adam_eps > 0))
      throw Error("TrainConfig: parameters out of range");
    for (int h : hidden)
      if (h < 1) throw Error("TrainConfig: hidden widths must be positive");
  }
};

struct EpochRecord {
  int epoch;
  double train_loss;
  double val_loss;
};

/// Trained encoder/decoder with the data normalizers it was trained under.
class DnnReduction final : public ReducedScheduling {
 public:
  DnnReduction(ModelPtr model, GammaLayout layout, MlpNetwork net, Normalizer in_norm, Normalizer out_norm,
               std::vector<Eigen::Index> varying_rows, Vec constant_gamma)
      : model_(std::move(model)), layout_(layout), net_(std::move(net)), in_norm_(std::move(in_norm)),
        out_norm_(std::move(out_norm)), varying_(std::move(varying_rows)), base_(std::move(constant_gamma)) {
    require_dims(base_.size() == layout_.size(), "DnnReduction: constant Gamma has the wrong length");
    require_dims(static_cast<int>(varying_.size()) == net_.shape().n_out && out_norm_.size() == net_.shape().n_out,
                 "DnnReduction: output width does not match the varying rows");
    require_dims(in_norm_.size() == net_.shape().n_in, "DnnReduction: input normalizer width mismatch");
    build_lpv();
  }

  std::string method() const override { return "dnn"; }
  int n_sched() const override { return net_.shape().n_theta; }
  GammaLayout layout() const override { return layout_; }

  Mat features(const SampleSet& s) const {
    Mat F(net_.shape().n_in, s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) F.col(k) = feature_map(*model_, s.X.col(k), s.U.col(k));
    return in_norm_.normalize(F);
  }
  Vec features(const StateSpacePoint& pt) const {
    check_point(*model_, pt);
    return in_norm_.normalize(feature_map(*model_, pt.x, pt.u));
  }

  Vec theta_hat(const StateSpacePoint& pt) const override { return net_.encode(features(pt)); }
  Vec gamma_hat(const StateSpacePoint& pt) const override { return expand(net_.predict(features(pt))).col(0); }

  /// Full Gamma columns for a batch of network outputs (normalized space).
  Mat expand(const Mat& out) const {
    const Mat vals = out_norm_.denormalize(out);
    Mat G = base_.replicate(1, out.cols());
    for (size_t i = 0; i < varying_.size(); ++i) G.row(varying_[i]) = vals.row(static_cast<Eigen::Index>(i));
    return G;
  }
  Mat theta_batch(const SampleSet& s) const { return net_.encode(features(s)); }
  Mat gamma_batch(const SampleSet& s) const { return expand(net_.predict(features(s))); }

  const AffineLpvModel& lpv() const override { return lpv_; }
  void set_region(BoxRegion region) { lpv_.region = std::move(region); }

  const MlpNetwork& network() const { return net_; }
  const Normalizer& input_normalizer() const { return in_norm_; }
  const Normalizer& output_normalizer() const { return out_norm_; }
  const std::vector<Eigen::Index>& varying_rows() const { return varying_; }
  const Vec& constant_gamma() const { return base_; }
  const ModelPtr& model() const { return model_; }

  std::vector<EpochRecord> curve;
  int best_epoch = 0;

 private:
  void build_lpv() {
    const ModelDims d = model_->dims();
    lpv_.dims = d;
    lpv_.Mi.clear();
    lpv_.M0 = constant_part(*model_).block_matrix();
    if (layout_.blocks == GammaBlocks::StateInput && d.nw > 0) lpv_.M0.block(0, d.nx + d.nu, d.nx, d.nw).setZero();
    lpv_.M0.topLeftCorner(layout_.rows(), layout_.cols()) =
        unvec_gamma(Vec(expand(Mat(net_.b_dec())).col(0)), layout_);
    const Vec inv = out_norm_.scale.cwiseInverse();
    for (int i = 0; i < n_sched(); ++i) {
      Vec g = Vec::Zero(layout_.size());
      for (size_t r = 0; r < varying_.size(); ++r)
        g[varying_[r]] = inv[static_cast<Eigen::Index>(r)] * net_.W_dec()(static_cast<Eigen::Index>(r), i);
      Mat Mi = Mat::Zero(lpv_.M0.rows(), lpv_.M0.cols());
      Mi.topLeftCorner(layout_.rows(), layout_.cols()) = unvec_gamma(g, layout_);
      lpv_.Mi.push_back(std::move(Mi));
    }
  }

  ModelPtr model_;
  GammaLayout layout_;
  MlpNetwork net_;
  Normalizer in_norm_, out_norm_;
  std::vector<Eigen::Index> varying_;
  Vec base_;
  AffineLpvModel lpv_;
};

/// Rows of Pi selected by index.
inline Mat select_rows(const Mat& Pi, const std::vector<Eigen::Index>& rows) {
  Mat out(static_cast<Eigen::Index>(rows.size()), Pi.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = Pi.row(rows[i]);
  return out;
}

/// Trains on `train` (Pi columns matched to SampleSet columns through
/// sample_index) and keeps the parameters with the best validation loss.
inline DnnReduction train_dnn(ModelPtr model, const VariationDataset& train, const SampleSet& train_samples,
                              const VariationDataset& val, const SampleSet& val_samples, int n_theta,
                              const TrainConfig& cfg) {
  cfg.validate();
  if (n_theta < 1) throw Error("train_dnn: n_theta must be at least 1");
  if (train.n_samples() < 2) throw Error("train_dnn: need at least two training samples");
  require_dims(val.layout.size() == train.layout.size(), "train_dnn: train/validation layouts differ");

  std::vector<Eigen::Index> rows = train.varying_rows;
  if (rows.empty()) rows.push_back(0);  // keep a one-row output so the net is well formed
  const Vec base = train.Pi.col(0);

  auto raw_features = [&](const VariationDataset& ds, const SampleSet& s) {
    Mat F(feature_dim(*model), ds.n_samples());
    for (Eigen::Index k = 0; k < ds.n_samples(); ++k) {
      const Eigen::Index c = ds.sample_index[static_cast<size_t>(k)];
      F.col(k) = feature_map(*model, s.X.col(c), s.U.col(c));
    }
    return F;
  };
  const Mat F_train = raw_features(train, train_samples);
  const Normalizer in_norm = fit_normalizer(F_train, cfg.norm);
  const Mat Y_train_raw = select_rows(train.Pi, rows);
  const Normalizer out_norm = fit_normalizer(Y_train_raw, cfg.norm);
  const Mat X = in_norm.normalize(F_train);
  const Mat Y = out_norm.normalize(Y_train_raw);
  const bool has_val = val.n_samples() > 0;
  const Mat Xv = has_val ? in_norm.normalize(raw_features(val, val_samples)) : X;
  const Mat Yv = has_val ? out_norm.normalize(select_rows(val.Pi, rows)) : Y;

  MlpShape shape;
  shape.n_in = static_cast<int>(X.rows());
  shape.hidden = cfg.hidden;
  shape.n_theta = n_theta;
  shape.n_out = static_cast<int>(rows.size());
  shape.bypass = cfg.bypass;
  MlpNetwork net(shape);
  net.initialize(cfg.seed);

  const AdamParams ap{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps};
  AdamState st;
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> order(static_cast<size_t>(X.cols()));
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);

  std::vector<EpochRecord> curve;
  auto record = [&](int epoch) {
    const double tl = net.loss(X, Y, cfg.l2);
    const double vl = net.loss(Xv, Yv, cfg.l2);
    if (!std::isfinite(tl) || !std::isfinite(vl))
      throw Error("train_dnn: non-finite loss at epoch " + std::to_string(epoch) + " (try a smaller learning rate)");
    curve.push_back({epoch, tl, vl});
    return vl;
  };

  double best = record(0);
  Vec best_params = net.params();
  int best_epoch = 0, since_best = 0;
  Vec grad;
  Mat xb, yb;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      const auto n = static_cast<Eigen::Index>(end - start);
      xb.resize(X.rows(), n);
      yb.resize(Y.rows(), n);
      for (Eigen::Index j = 0; j < n; ++j) {
        xb.col(j) = X.col(order[start + static_cast<size_t>(j)]);
        yb.col(j) = Y.col(order[start + static_cast<size_t>(j)]);
      }
      net.loss(xb, yb, cfg.l2, &grad);
      adam_step(net.params(), grad, st, ap);
    }
    const double vl = record(epoch);
    if (vl < best) {
      best = vl;
      best_params = net.params();
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  net.params() = best_params;
  DnnReduction red(std::move(model), train.layout, std::move(net), in_norm, out_norm, rows, base);
  red.curve = std::move(curve);
  red.best_epoch = best_epoch;
  return red;
}

}  // namespace lpvred

#endif  // LPVRED_DNN_HPP
