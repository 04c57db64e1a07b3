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
    Reduction quality measures.

    For data Y (rows = quantities, columns = samples) and an approximation
    Yhat, the per-row error is |Y_i - Yhat_i|_2 / |Y_i|_inf. It is applied to
    Pi_N (e_Pi) and to stacked state derivatives (e_xdot). Both grow with
    sqrt(N), so every report carries N.
*/

#ifndef LPVRED_METRICS_HPP
#define LPVRED_METRICS_HPP

#include "dnn.hpp"
#include "pca.hpp"

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

namespace lpvred {

struct RowErrors {
  Vec values;
  std::vector<Eigen::Index> flagged;  ///< rows whose reference has zero inf-norm
};

/// |Y_i - Yhat_i|_2 / |Y_i|_inf per row; a zero denominator is replaced by 1.
inline RowErrors row_errors(const Mat& Y, const Mat& Yhat) {
  require_dims(Y.rows() == Yhat.rows() && Y.cols() == Yhat.cols(), "row_errors: shape mismatch");
  RowErrors out;
  out.values.resize(Y.rows());
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    double den = Y.cols() > 0 ? Y.row(i).cwiseAbs().maxCoeff() : 0.0;
    if (den == 0.0) {
      den = 1.0;
      out.flagged.push_back(i);
    }
    out.values[i] = (Y.row(i) - Yhat.row(i)).norm() / den;
  }
  return out;
}

inline RowErrors error_pi(const Mat& Pi, const Mat& Pi_hat) { return row_errors(Pi, Pi_hat); }

struct Aggregate {
  double max = 0.0;
  double rms = 0.0;
};

/// max_i a_i and sqrt(sum_i a_i^2). With mean_square the sum is divided by n.
inline Aggregate aggregate(const Vec& a, bool mean_square = false) {
  if (a.size() == 0) throw Error("aggregate: empty vector");
  Aggregate g;
  g.max = a.maxCoeff();
  g.rms = std::sqrt(a.squaredNorm() / (mean_square ? static_cast<double>(a.size()) : 1.0));
  return g;
}

/// Reconstructed Pi for the columns of a variation dataset. PCA and DNN
/// reductions use their batch paths; others go point by point.
inline Mat reconstruct_pi(const ReducedScheduling& red, const VariationDataset& ds, const SampleSet& samples,
                          unsigned threads = 1) {
  require_dims(red.layout().size() == ds.layout.size(), "reconstruct_pi: Gamma layouts differ");
  if (const auto* pca = dynamic_cast<const PcaReduction*>(&red)) return pca->reconstruct(pca->project(ds.Pi));
  const SampleSet sub = select_columns(samples, ds.sample_index);
  if (const auto* dnn = dynamic_cast<const DnnReduction*>(&red)) return dnn->gamma_batch(sub);
  Mat out(ds.n_pi(), ds.n_samples());
  parallel_for(static_cast<size_t>(ds.n_samples()), threads, [&](size_t k) {
    out.col(static_cast<Eigen::Index>(k)) = red.gamma_hat(sub.point(static_cast<Eigen::Index>(k)));
  });
  return out;
}

struct DerivativePair {
  Mat f;      ///< factorized derivative A x + Bu u, nx x N
  Mat f_hat;  ///< reduced-model derivative
  std::size_t skipped = 0;
};

/// True and reduced derivatives with w = 0.
inline DerivativePair derivative_pair(const FactorizedModel& model, const ReducedScheduling& red,
                                      const SampleSet& samples, unsigned threads = 1) {
  const ModelDims d = model.dims();
  const Eigen::Index N = samples.size();
  Mat f(d.nx, N), fh(d.nx, N);
  std::vector<char> ok(static_cast<size_t>(N), 1);
  parallel_for(static_cast<size_t>(N), threads, [&](size_t k) {
    StateSpacePoint pt = samples.point(static_cast<Eigen::Index>(k));
    pt.w.setZero();
    try {
      const Vec a = factorized_derivative(model, pt);
      const Vec b = reduced_derivative(red, pt);
      if (!a.allFinite() || !b.allFinite()) throw Error("non-finite derivative");
      f.col(static_cast<Eigen::Index>(k)) = a;
      fh.col(static_cast<Eigen::Index>(k)) = b;
    } catch (const Error&) {
      ok[k] = 0;
    }
  });
  DerivativePair out;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < N; ++k)
    if (ok[static_cast<size_t>(k)]) keep.push_back(k);
  out.skipped = static_cast<std::size_t>(N) - keep.size();
  if (out.skipped > 0) warn("error_xdot: skipped " + std::to_string(out.skipped) + " samples that failed to evaluate");
  out.f = f(Eigen::all, keep);
  out.f_hat = fh(Eigen::all, keep);
  return out;
}

inline RowErrors error_xdot(const FactorizedModel& model, const ReducedScheduling& red, const SampleSet& samples,
                            unsigned threads = 1) {
  const DerivativePair p = derivative_pair(model, red, samples, threads);
  return row_errors(p.f, p.f_hat);
}

struct ErrorReport {
  std::string method;
  std::string normalization;
  std::string dataset = "validation";
  int n_theta = 0;
  Eigen::Index samples = 0;
  RowErrors e_pi;
  RowErrors e_xdot;
  bool mean_square = false;

  Aggregate pi() const { return aggregate(e_pi.values, mean_square); }
  Aggregate xdot() const { return aggregate(e_xdot.values, mean_square); }

  nlohmann::json to_json() const {
    auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    const Aggregate p = pi(), x = xdot();
    return {{"method", method},
            {"normalization", normalization},
            {"dataset", dataset},
            {"n_theta_hat", n_theta},
            {"N", samples},
            {"rms_definition", mean_square ? "sqrt(mean(a^2))" : "sqrt(sum(a^2))"},
            {"e_pi", vec(e_pi.values)},
            {"e_pi_flagged_rows", e_pi.flagged},
            {"e_xdot", vec(e_xdot.values)},
            {"e_xdot_flagged_rows", e_xdot.flagged},
            {"max_e_pi", p.max},
            {"rms_e_pi", p.rms},
            {"max_e_xdot", x.max},
            {"rms_e_xdot", x.rms}};
  }
};

/// Tidy CSV: one line per (method, normalization, n_theta_hat, measure).
inline std::string error_csv_header() { return "method,normalization,n_theta_hat,measure,value,N,dataset\n"; }

inline std::string error_csv_rows(const ErrorReport& r) {
  std::ostringstream os;
  os.precision(17);
  const Aggregate p = r.pi(), x = r.xdot();
  const std::pair<const char*, double> rows[] = {
      {"max_e_pi", p.max}, {"rms_e_pi", p.rms}, {"max_e_xdot", x.max}, {"rms_e_xdot", x.rms}};
  for (const auto& [name, v] : rows)
    os << r.method << ',' << r.normalization << ',' << r.n_theta << ',' << name << ',' << v << ',' << r.samples
       << ',' << r.dataset << '\n';
  return os.str();
}

/// e_Pi and e_xdot of a reduction on one dataset.
inline ErrorReport evaluate_reduction(const FactorizedModel& model, const ReducedScheduling& red,
                                      const VariationDataset& ds, const SampleSet& samples,
                                      const std::string& normalization, const std::string& dataset = "validation",
                                      unsigned threads = 1) {
  ErrorReport r;
  r.method = red.method();
  r.normalization = normalization;
  r.dataset = dataset;
  r.n_theta = red.n_sched();
  r.samples = ds.n_samples();
  r.e_pi = error_pi(ds.Pi, reconstruct_pi(red, ds, samples, threads));
  r.e_xdot = error_xdot(model, red, select_columns(samples, ds.sample_index), threads);
  return r;
}

/// Open-loop runs of the nonlinear model and of each reduced model under
/// one input signal, each reduced model scheduled along its own state.
struct TrajectoryComparison {
  Trajectory reference;
  std::vector<std::string> labels;
  std::vector<Trajectory> reduced;
  std::vector<double> horizons;       ///< times at which drift is reported
  std::vector<std::vector<double>> drift;  ///< [model][horizon] state error norm
  std::vector<double> max_error;      ///< over the common horizon, per model

  nlohmann::json summary() const {
    nlohmann::json models = nlohmann::json::array();
    for (size_t m = 0; m < reduced.size(); ++m) {
      models.push_back({{"label", labels[m]},
                        {"diverged", reduced[m].diverged},
                        {"steps", reduced[m].points.size()},
                        {"max_state_error", max_error[m]},
                        {"drift", drift[m]}});
    }
    return {{"h", reference.h},
            {"steps", reference.points.size()},
            {"reference_diverged", reference.diverged},
            {"horizons", horizons},
            {"models", models}};
  }
};

inline TrajectoryComparison compare_trajectories(const FactorizedModel& model,
                                                 const std::vector<const ReducedScheduling*>& reductions,
                                                 const std::vector<std::string>& labels, const Vec& x0,
                                                 const InputSignal& input, double h, double T,
                                                 int n_horizons = 4) {
  require_dims(labels.size() == reductions.size(), "compare_trajectories: one label per reduction");
  for (const auto* r : reductions)
    require_dims(r && r->layout().dims == model.dims(), "compare_trajectories: reduction dimensions differ");
  TrajectoryComparison out;
  out.reference = integrate_rk4(model, x0, input, h, T);
  out.labels = labels;
  for (int k = 1; k <= n_horizons; ++k) out.horizons.push_back(T * k / n_horizons);
  for (const auto* r : reductions) {
    const ReducedScheduling& red = *r;
    // Under the state/input layout the reduced model has no wind block.
    auto rhs = [&red](const StateSpacePoint& p) { return reduced_derivative(red, p); };
    Trajectory t = integrate_rk4_with(rhs, x0, input, h, T);
    const size_t n = std::min(t.points.size(), out.reference.points.size());
    double mx = 0.0;
    for (size_t k = 0; k < n; ++k) mx = std::max(mx, (t.points[k].x - out.reference.points[k].x).norm());
    std::vector<double> drift;
    for (double hz : out.horizons) {
      const auto k = static_cast<size_t>(std::llround(hz / h));
      drift.push_back(k < n ? (t.points[k].x - out.reference.points[k].x).norm()
                            : std::numeric_limits<double>::infinity());
    }
    out.max_error.push_back(mx);
    out.drift.push_back(std::move(drift));
    out.reduced.push_back(std::move(t));
  }
  return out;
}

}  // namespace lpvred

#endif  // LPVRED_METRICS_HPP
