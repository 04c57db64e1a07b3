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
    Scheduling regions around a cloud of reduced scheduling values (one
    point per column): boxes, ellipsoids and spheres, and a Monte Carlo
    measure of how much of a box the cloud's convex hull leaves unused.
*/

#ifndef LPVRED_REGION_HPP
#define LPVRED_REGION_HPP

#include "box.hpp"
#include "hull.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace lpvred {

namespace detail {

inline void require_points(const Mat& P, const char* who) {
  if (P.cols() == 0 || P.rows() == 0) throw Error(std::string(who) + ": empty point set");
  if (!P.allFinite()) throw Error(std::string(who) + ": non-finite point");
}

/// Tightest box of P in the frame R (columns are box axes).
inline BoxRegion box_in_frame(const Mat& P, const Mat& R, const std::string& method) {
  const Mat B = R.transpose() * P;
  BoxRegion box;
  box.rotation = R;
  box.method = method;
  box.lo = B.rowwise().minCoeff();
  box.hi = B.rowwise().maxCoeff();
  bool widened = false;
  for (Eigen::Index i = 0; i < box.lo.size(); ++i) {
    const Interval iv = widen_degenerate({box.lo[i], box.hi[i]});
    widened |= iv.lo != box.lo[i];
    box.lo[i] = iv.lo;
    box.hi[i] = iv.hi;
  }
  if (widened) box.note = "degenerate axis widened";
  return box;
}

/// Permutes and flips the columns of an orthonormal frame so it is as close
/// to the identity as possible while keeping determinant +1.
inline Mat canonical_frame(const Mat& R) {
  const auto d = static_cast<int>(R.cols());
  std::vector<int> perm(static_cast<size_t>(d)), best_perm;
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1;
  do {
    double s = 0;
    for (int i = 0; i < d; ++i) s += std::abs(R(i, perm[static_cast<size_t>(i)]));
    if (s > best + 1e-12) best = s, best_perm = perm;
  } while (std::next_permutation(perm.begin(), perm.end()));
  Mat out(R.rows(), d);
  for (int i = 0; i < d; ++i) {
    out.col(i) = R.col(best_perm[static_cast<size_t>(i)]);
    if (out(i, i) < 0) out.col(i) *= -1.0;
  }
  if (out.determinant() < 0) {
    int weakest = 0;
    for (int i = 1; i < d; ++i)
      if (std::abs(out(i, i)) < std::abs(out(weakest, weakest))) weakest = i;
    out.col(weakest) *= -1.0;
  }
  return out;
}

}  // namespace detail

/// Componentwise extremes. Degenerate axes are widened.
inline BoxRegion axis_aligned_box(const Mat& P) {
  detail::require_points(P, "axis_aligned_box");
  return detail::box_in_frame(P, Mat::Identity(P.rows(), P.rows()), "axis_aligned");
}

/// Proper rotation R minimizing |R P - Q|_F over matched columns, centered
/// first unless `center` is false (direction sets).
inline Mat kabsch_rotation(const Mat& P, const Mat& Q, bool center = true) {
  require_dims(P.rows() == Q.rows() && P.cols() == Q.cols(), "kabsch_rotation: shape mismatch");
  const Mat Pc = center ? Mat(P.colwise() - P.rowwise().mean()) : P;
  const Mat Qc = center ? Mat(Q.colwise() - Q.rowwise().mean()) : Q;
  const Mat H = Pc * Qc.transpose();
  Eigen::JacobiSVD<Mat> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat& U = svd.matrixU();
  const Mat& V = svd.matrixV();
  Vec s = Vec::Ones(P.rows());
  if ((V * U.transpose()).determinant() < 0) s[s.size() - 1] = -1.0;
  return V * s.asDiagonal() * U.transpose();
}

/// Candidate box frames for a 2-D or 3-D cloud: principal axes, the
/// identity, and frames built from hull facets.
inline std::vector<Mat> candidate_frames(const Mat& P) {
  const Eigen::Index d = P.rows();
  std::vector<Mat> frames{Mat::Identity(d, d)};
  const Mat C = P.colwise() - P.rowwise().mean();
  Eigen::SelfAdjointEigenSolver<Mat> es(C * C.transpose());
  frames.push_back(es.eigenvectors());

  auto edge_frames_2d = [](const Mat& Q) {
    std::vector<Eigen::Vector2d> dirs;
    const auto h = hull_2d_indices(Q);
    for (size_t i = 0; i < h.size() && h.size() >= 2; ++i) {
      Eigen::Vector2d e = Q.col(h[(i + 1) % h.size()]) - Q.col(h[i]);
      if (e.norm() > 0) dirs.push_back(e.normalized());
    }
    return dirs;
  };

  if (d == 2) {
    for (const auto& e : edge_frames_2d(P)) {
      Mat F(2, 2);
      F << e[0], -e[1], e[1], e[0];
      frames.push_back(F);
    }
  } else if (d == 3) {
    const ConvexHull hull = convex_hull_3d(P);
    for (Eigen::Index k = 0; k < hull.normals.cols(); ++k) {
      const Eigen::Vector3d nrm = hull.normals.col(k);
      // Orthonormal basis of the facet plane.
      Eigen::Vector3d t = std::abs(nrm[0]) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
      const Eigen::Vector3d a = (t - t.dot(nrm) * nrm).normalized();
      const Eigen::Vector3d b = nrm.cross(a);
      Mat Q(2, P.cols());
      Q.row(0) = a.transpose() * P;
      Q.row(1) = b.transpose() * P;
      for (const auto& e : edge_frames_2d(Q)) {
        Mat F(3, 3);
        F.col(0) = e[0] * a + e[1] * b;
        F.col(1) = -e[1] * a + e[0] * b;
        F.col(2) = nrm;
        frames.push_back(F);
      }
    }
  }
  return frames;
}

/// Rotated box for dimension 2 or 3: each candidate frame is turned into a
/// proper rotation with the Kabsch alignment of its axes onto the
/// coordinate axes, and the smallest resulting box is kept. The identity is
/// among the candidates, so the result is never larger than the
/// axis-aligned box.
inline BoxRegion kabsch_box(const Mat& P) {
  detail::require_points(P, "kabsch_box");
  const Eigen::Index d = P.rows();
  if (d == 1) return axis_aligned_box(P);
  if (d > 3) throw Error("kabsch_box: dimension " + std::to_string(d) + " not supported (at most 3)");
  if (P.cols() < d + 1) throw Error("kabsch_box: need at least dimension + 1 points");
  const Mat C = P.colwise() - P.rowwise().mean();
  Eigen::JacobiSVD<Mat> svd(C);
  const Vec s = svd.singularValues();
  if (s[d - 1] <= 1e-12 * std::max(1.0, s[0])) {
    warn("kabsch_box: rank-deficient point cloud, using the axis-aligned box");
    BoxRegion box = axis_aligned_box(P);
    box.note = box.note.empty() ? "rank-deficient cloud" : box.note + "; rank-deficient cloud";
    return box;
  }
  // Extents along any direction are attained at hull vertices.
  const Mat H = P.cols() > 64 ? Mat(P(Eigen::all, convex_hull(P).vertices)) : P;
  const Mat I = Mat::Identity(d, d);
  BoxRegion best;
  double best_vol = std::numeric_limits<double>::infinity();
  for (const Mat& F : candidate_frames(H)) {
    // R maps the frame's axes onto the coordinate axes; the box frame is R^T.
    const Mat R = kabsch_rotation(F, I, false);
    const Mat frame = detail::canonical_frame(R.transpose());
    BoxRegion b = detail::box_in_frame(H, frame, "kabsch");
    if (b.volume() < best_vol * (1.0 - 1e-12)) {
      best_vol = b.volume();
      best = std::move(b);
    }
  }
  return best;
}

/// {theta : (theta - c)^T E (theta - c) <= 1}
struct Ellipsoid {
  Vec center;
  Mat E;
  double duality_gap = 0.0;
  int iterations = 0;
  std::string method = "mvee";

  int dim() const { return static_cast<int>(center.size()); }
  double membership(const Vec& p) const {
    const Vec d = p - center;
    return d.dot(E * d);
  }
  bool contains(const Vec& p, double tol = 1e-9) const { return membership(p) <= 1.0 + tol; }
  double volume() const {
    const int n = dim();
    const double unit = std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
    return unit / std::sqrt(E.determinant());
  }
  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < E.rows(); ++r) {
      std::vector<double> row(static_cast<size_t>(E.cols()));
      for (Eigen::Index c = 0; c < E.cols(); ++c) row[static_cast<size_t>(c)] = E(r, c);
      rows.push_back(row);
    }
    return {{"type", "ellipsoid"},
            {"method", method},
            {"center", std::vector<double>(center.data(), center.data() + center.size())},
            {"shape", rows},
            {"volume", volume()},
            {"duality_gap", duality_gap},
            {"iterations", iterations}};
  }
};

namespace detail {

/// Khachiyan iteration on full-dimensional points.
inline Ellipsoid khachiyan(const Mat& P, double tol, int max_iter) {
  const Eigen::Index d = P.rows(), n = P.cols();
  Mat Q(d + 1, n);
  Q.topRows(d) = P;
  Q.row(d).setOnes();
  Vec u = Vec::Constant(n, 1.0 / static_cast<double>(n));
  Ellipsoid ell;
  double gap = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < max_iter; ++it) {
    const Mat X = Q * u.asDiagonal() * Q.transpose();
    const Eigen::LDLT<Mat> ldlt(X);
    const Vec M = (Q.array() * ldlt.solve(Q).array()).colwise().sum().transpose();
    const double m = static_cast<double>(d + 1);
    Eigen::Index j = 0;
    const double mx = M.maxCoeff(&j);
    gap = (mx - m) / m;
    if (gap <= tol) break;
    // Away step on the support point with the smallest M (Todd-Yildirim).
    Eigen::Index k = -1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (u[i] > 0 && (k < 0 || M[i] < M[k])) k = i;
    if (mx - m >= m - M[k] || u[k] >= 1.0) {
      const double step = (mx - m) / (m * (mx - 1.0));
      u *= (1.0 - step);
      u[j] += step;
    } else {
      const double cap = u[k] / (1.0 - u[k]);
      const double beta = M[k] > 1.0 ? std::min((m - M[k]) / (m * (M[k] - 1.0)), cap) : cap;
      u *= (1.0 + beta);
      u[k] = beta == cap ? 0.0 : u[k] - beta;
    }
  }
  ell.center = P * u;
  const Mat S = P * u.asDiagonal() * P.transpose() - ell.center * ell.center.transpose();
  ell.E = S.inverse() / static_cast<double>(d);
  ell.E = 0.5 * (ell.E + ell.E.transpose());
  ell.duality_gap = std::max(0.0, gap);
  ell.iterations = it;
  return ell;
}

/// Khachiyan on a growing subset: solve, add the points that break the
/// optimality bound, repeat. Same stopping rule as the plain iteration, checked
/// over every point.
inline Ellipsoid khachiyan_active(const Mat& P, double tol, int max_iter) {
  const Eigen::Index d = P.rows(), n = P.cols();
  constexpr Eigen::Index kDirect = 256, kBatch = 64;
  if (n <= kDirect) return khachiyan(P, tol, max_iter);
  std::vector<char> in(static_cast<size_t>(n), 0);
  std::vector<Eigen::Index> active;
  auto take = [&](Eigen::Index i) {
    if (!in[static_cast<size_t>(i)]) {
      in[static_cast<size_t>(i)] = 1;
      active.push_back(i);
    }
  };
  for (Eigen::Index r = 0; r < d; ++r) {
    Eigen::Index lo = 0, hi = 0;
    P.row(r).minCoeff(&lo);
    P.row(r).maxCoeff(&hi);
    take(lo);
    take(hi);
  }
  for (Eigen::Index i = 0; i < n; i += std::max<Eigen::Index>(1, n / 128)) take(i);
  const double m = static_cast<double>(d + 1);
  int iterations = 0;
  for (;;) {
    std::sort(active.begin(), active.end());
    Ellipsoid ell = khachiyan(P(Eigen::all, active), tol, max_iter);
    iterations += ell.iterations;
    // M_i = 1 + d (p_i - c)^T E (p_i - c) in the lifted problem.
    std::vector<std::pair<double, Eigen::Index>> worst;
    double gap = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = (1.0 + static_cast<double>(d) * ell.membership(P.col(i)) - m) / m;
      gap = std::max(gap, g);
      if (g > tol && !in[static_cast<size_t>(i)]) worst.emplace_back(g, i);
    }
    if (worst.empty() || iterations >= max_iter) {
      ell.duality_gap = gap;
      ell.iterations = iterations;
      return ell;
    }
    const auto cut = worst.begin() + std::min<std::ptrdiff_t>(kBatch, static_cast<std::ptrdiff_t>(worst.size()));
    std::partial_sort(worst.begin(), cut, worst.end(), std::greater<>());
    for (auto it = worst.begin(); it != cut; ++it) take(it->second);
  }
}

/// Hull vertices of a full-dimensional cloud in dimension <= 3; they carry
/// the same minimum-volume ellipsoid as the whole cloud.
inline Mat ellipsoid_support(const Mat& P) {
  if (P.rows() > 3 || P.cols() <= 64) return P;
  const ConvexHull hull = convex_hull(P);
  if (hull.vertices.size() <= static_cast<size_t>(P.rows())) return P;
  return P(Eigen::all, hull.vertices);
}

/// Scales E so that the farthest point sits exactly on the boundary.
inline void enclose_all(Ellipsoid& ell, const Mat& P) {
  double worst = 0;
  for (Eigen::Index k = 0; k < P.cols(); ++k) worst = std::max(worst, ell.membership(P.col(k)));
  if (worst > 1.0) ell.E /= worst;
}

}  // namespace detail

/// Minimum-volume enclosing ellipsoid. A flat cloud is handled in its affine
/// hull, and the flat directions get a half-width of kWidenedWidth / 2.
inline Ellipsoid min_volume_ellipsoid(const Mat& P, double tol = 1e-6, int max_iter = 100000) {
  detail::require_points(P, "min_volume_ellipsoid");
  if (!(tol > 0)) throw Error("min_volume_ellipsoid: tolerance must be positive");
  const Eigen::Index d = P.rows();
  const Vec mean = P.rowwise().mean();
  const Mat C = P.colwise() - mean;
  Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeFullU);
  const Vec s = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > 1e-10 * std::max(1.0, s[0])) ++r;
  if (r == d) {
    Ellipsoid ell = detail::khachiyan_active(detail::ellipsoid_support(P), tol, max_iter);
    detail::enclose_all(ell, P);
    return ell;
  }
  warn("min_volume_ellipsoid: cloud spans " + std::to_string(r) + " of " + std::to_string(d) +
       " dimensions; flat directions are padded");
  const Mat U = svd.matrixU();
  const double flat = 1.0 / std::pow(0.5 * kWidenedWidth, 2);
  Ellipsoid ell;
  ell.center = mean;
  Mat Einner = Mat::Zero(d, d);
  if (r > 0) {
    const Mat Ur = U.leftCols(r);
    const Mat Pr = Ur.transpose() * C;
    Ellipsoid sub = r >= 1 && P.cols() > r ? detail::khachiyan_active(detail::ellipsoid_support(Pr), tol, max_iter) : Ellipsoid{};
    if (sub.center.size() == 0) {
      sub.center = Pr.rowwise().mean();
      sub.E = Mat::Identity(r, r);
    }
    detail::enclose_all(sub, Pr);
    ell.center += Ur * sub.center;
    ell.duality_gap = sub.duality_gap;
    ell.iterations = sub.iterations;
    Einner += Ur * sub.E * Ur.transpose();
  }
  const Mat Uf = U.rightCols(d - r);
  Einner += flat * Uf * Uf.transpose();
  ell.E = 0.5 * (Einner + Einner.transpose());
  detail::enclose_all(ell, P);
  return ell;
}

namespace detail {

struct Ball {
  Vec c;
  double r2 = -1.0;
  bool contains(const Vec& p) const { return r2 >= 0 && (p - c).squaredNorm() <= r2 * (1.0 + 1e-12) + 1e-300; }
};

/// Smallest ball with all support points on its boundary.
inline Ball ball_through(const std::vector<Vec>& S) {
  Ball b;
  if (S.empty()) return b;
  b.c = S[0];
  b.r2 = 0;
  if (S.size() == 1) return b;
  const auto k = static_cast<Eigen::Index>(S.size() - 1);
  Mat Q(S[0].size(), k);
  for (Eigen::Index i = 0; i < k; ++i) Q.col(i) = S[static_cast<size_t>(i) + 1] - S[0];
  const Mat G = Q.transpose() * Q;
  const Vec rhs = 0.5 * G.diagonal();
  const Vec lam = G.completeOrthogonalDecomposition().solve(rhs);
  b.c = S[0] + Q * lam;
  b.r2 = 0;
  for (const auto& p : S) b.r2 = std::max(b.r2, (p - b.c).squaredNorm());
  return b;
}

inline Ball welzl(const Mat& P, const std::vector<Eigen::Index>& order, size_t end, std::vector<Vec>& support,
                  Eigen::Index dim) {
  Ball b = ball_through(support);
  if (static_cast<Eigen::Index>(support.size()) == dim + 1) return b;
  for (size_t i = 0; i < end; ++i) {
    const Vec p = P.col(order[i]);
    if (b.contains(p)) continue;
    support.push_back(p);
    b = welzl(P, order, i, support, dim);
    support.pop_back();
  }
  return b;
}

}  // namespace detail

/// Minimum enclosing sphere (Welzl) in dimension <= 3; a Badoiu-Clarkson
/// approximation above that. Returned as an ellipsoid with E = I / r^2.
inline Ellipsoid min_enclosing_sphere(const Mat& P, std::uint64_t seed = 7) {
  detail::require_points(P, "min_enclosing_sphere");
  const Eigen::Index d = P.rows();
  Vec c;
  std::string method = "welzl";
  if (d <= 3) {
    std::vector<Eigen::Index> order(static_cast<size_t>(P.cols()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Vec> support;
    c = detail::welzl(P, order, order.size(), support, d).c;
  } else {
    method = "badoiu_clarkson";
    c = P.col(0);
    for (int it = 1; it <= 10000; ++it) {
      Eigen::Index far = 0;
      (P.colwise() - c).colwise().squaredNorm().maxCoeff(&far);
      c += (P.col(far) - c) / static_cast<double>(it + 1);
    }
  }
  double r2 = (P.colwise() - c).colwise().squaredNorm().maxCoeff();
  r2 = std::max(r2, std::pow(0.5 * kWidenedWidth, 2));
  Ellipsoid ell;
  ell.center = c;
  ell.E = Mat::Identity(d, d) / r2;
  ell.method = method;
  return ell;
}

/// Box aligned with the ellipsoid's principal axes, half-widths 1/sqrt(eig).
inline BoxRegion ellipsoid_to_box(const Ellipsoid& ell) {
  Eigen::SelfAdjointEigenSolver<Mat> es(ell.E);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0)
    throw Error("ellipsoid_to_box: shape matrix is not positive definite");
  const Mat R = detail::canonical_frame(es.eigenvectors());
  const Vec lam = (R.transpose() * ell.E * R).diagonal();
  const Vec half = lam.cwiseSqrt().cwiseInverse();
  const Vec mid = R.transpose() * ell.center;
  BoxRegion box;
  box.rotation = R;
  box.lo = mid - half;
  box.hi = mid + half;
  box.method = ell.method == "mvee" ? "ellipsoid" : "sphere";
  return box;
}

/// Unused-to-used volume ratio of a box relative to the points' convex hull.
struct ConservatismResult {
  double ratio = 0.0;
  double std_error = 0.0;
  double inside_fraction = 0.0;
  std::size_t samples = 0;
  std::size_t inside = 0;
  double box_volume = 0.0;
  std::optional<double> hull_volume;  ///< exact, dimension <= 3
  std::optional<double> exact_ratio;
  std::string membership;  ///< "exact_hull" or "min_norm"
  std::string note;

  nlohmann::json to_json() const {
    nlohmann::json j{{"ratio", std::isfinite(ratio) ? nlohmann::json(ratio) : nlohmann::json("inf")},
                     {"std_error", std::isfinite(std_error) ? nlohmann::json(std_error) : nlohmann::json("inf")},
                     {"inside_fraction", inside_fraction},
                     {"samples", samples},
                     {"inside", inside},
                     {"box_volume", box_volume},
                     {"membership", membership},
                     {"note", note}};
    j["hull_volume"] = hull_volume ? nlohmann::json(*hull_volume) : nlohmann::json(nullptr);
    j["exact_ratio"] = exact_ratio ? nlohmann::json(*exact_ratio) : nlohmann::json(nullptr);
    return j;
  }
};

struct ConservatismOptions {
  std::size_t samples = 1000000;
  std::uint64_t seed = 11;
  unsigned threads = 1;
  double membership_tol = 1e-9;
};

/// Monte Carlo estimate (1 - p) / p with p the fraction of uniform box
/// samples inside conv(P). Samples are drawn in fixed-size chunks, each with
/// its own seed, so the estimate does not depend on the thread count.
inline ConservatismResult conservatism_ratio(const Mat& P, const BoxRegion& box, ConservatismOptions opt = {}) {
  detail::require_points(P, "conservatism_ratio");
  require_dims(P.rows() == box.dim(), "conservatism_ratio: box and points differ in dimension");
  if (opt.samples == 0) throw Error("conservatism_ratio: sample count must be positive");
  for (Eigen::Index k = 0; k < P.cols(); ++k)
    if (!box.contains(P.col(k), 1e-9)) throw Error("conservatism_ratio: box does not contain every point");

  ConservatismResult res;
  res.samples = opt.samples;
  res.box_volume = box.volume();
  const Eigen::Index d = P.rows();
  std::optional<ConvexHull> hull;
  if (d <= 3) {
    hull = convex_hull(P);
    res.membership = "exact_hull";
    res.hull_volume = hull->volume;
    if (hull->volume > 0) res.exact_ratio = (res.box_volume - hull->volume) / hull->volume;
  } else {
    res.membership = "min_norm";
  }
  const double scale = detail::extent(P);
  const bool flat = hull && hull->normals.cols() == 0 && d > 1;

  constexpr std::size_t chunk = 1 << 14;
  const std::size_t chunks = (opt.samples + chunk - 1) / chunk;
  std::vector<std::size_t> counts(chunks, 0);
  const Vec width = box.hi - box.lo;
  parallel_for(chunks, opt.threads, [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const std::size_t n = std::min(chunk, opt.samples - c * chunk);
    Vec b(d);
    std::size_t in = 0;
    for (std::size_t s = 0; s < n; ++s) {
      for (Eigen::Index i = 0; i < d; ++i) b[i] = box.lo[i] + width[i] * uni(rng);
      const Vec q = box.rotation * b;
      if (flat) continue;
      const bool inside = hull ? hull->contains(q, opt.membership_tol) : hull_contains(P, q, scale, 1e-6).inside;
      in += inside ? 1 : 0;
    }
    counts[c] = in;
  });
  res.inside = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  const double n = static_cast<double>(res.samples);
  const double p = static_cast<double>(res.inside) / n;
  res.inside_fraction = p;
  if (res.inside == 0) {
    res.ratio = std::numeric_limits<double>::infinity();
    res.std_error = std::numeric_limits<double>::infinity();
    res.note = "no Monte Carlo sample fell inside the hull";
    warn("conservatism_ratio: " + res.note);
    return res;
  }
  res.ratio = (1.0 - p) / p;
  res.std_error = std::sqrt(p * (1.0 - p) / n) / (p * p);
  return res;
}

}  // namespace lpvred

#endif  // LPVRED_REGION_HPP
