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
    Convex hulls as half-space lists: exact hulls in one to three
    dimensions and a min-norm-point membership test for any dimension.
*/

#ifndef LPVRED_HULL_HPP
#define LPVRED_HULL_HPP

#include "core.hpp"

#include <array>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace lpvred {

/// Intersection of half-spaces normal_k . p <= offset_k (unit normals).
struct ConvexHull {
  int dim = 0;
  Mat normals;  ///< dim x F
  Vec offsets;  ///< F
  double volume = 0.0;
  std::vector<Eigen::Index> vertices;  ///< indices into the input cloud
  double scale = 1.0;                  ///< extent of the cloud, sets tolerances

  bool contains(const Vec& p, double tol = 1e-9) const {
    const double slack = tol * scale;
    for (Eigen::Index k = 0; k < normals.cols(); ++k)
      if (normals.col(k).dot(p) > offsets[k] + slack) return false;
    return true;
  }
};

namespace detail {

inline double extent(const Mat& P) {
  if (P.cols() == 0) return 1.0;
  const double e = (P.rowwise().maxCoeff() - P.rowwise().minCoeff()).maxCoeff();
  return e > 0 ? e : 1.0;
}

inline double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

}  // namespace detail

/// Counter-clockwise hull vertex indices (Andrew's monotone chain),
/// collinear points dropped.
inline std::vector<Eigen::Index> hull_2d_indices(const Mat& P) {
  require_dims(P.rows() == 2, "hull_2d: points must be 2-D");
  const Eigen::Index n = P.cols();
  std::vector<Eigen::Index> idx(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return P(0, a) < P(0, b) || (P(0, a) == P(0, b) && P(1, a) < P(1, b));
  });
  if (n < 3) return idx;
  std::vector<Eigen::Index> h(2 * static_cast<size_t>(n));
  size_t k = 0;
  for (size_t i = 0; i < idx.size(); ++i) {
    while (k >= 2 && detail::cross2(P.col(h[k - 2]), P.col(h[k - 1]), P.col(idx[i])) <= 0) --k;
    h[k++] = idx[i];
  }
  for (size_t i = idx.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && detail::cross2(P.col(h[k - 2]), P.col(h[k - 1]), P.col(idx[i - 1])) <= 0) --k;
    h[k++] = idx[i - 1];
  }
  h.resize(k - 1);
  return h;
}

inline ConvexHull convex_hull_2d(const Mat& P) {
  ConvexHull hull;
  hull.dim = 2;
  hull.scale = detail::extent(P);
  hull.vertices = hull_2d_indices(P);
  const size_t m = hull.vertices.size();
  if (m < 3) return hull;  // degenerate: zero area, no half-spaces
  hull.normals.resize(2, static_cast<Eigen::Index>(m));
  hull.offsets.resize(static_cast<Eigen::Index>(m));
  double area = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const Vec a = P.col(hull.vertices[i]);
    const Vec b = P.col(hull.vertices[(i + 1) % m]);
    area += a[0] * b[1] - a[1] * b[0];
    Vec nrm(2);
    nrm << b[1] - a[1], a[0] - b[0];  // outward for counter-clockwise order
    nrm.normalize();
    hull.normals.col(static_cast<Eigen::Index>(i)) = nrm;
    hull.offsets[static_cast<Eigen::Index>(i)] = nrm.dot(a);
  }
  hull.volume = 0.5 * area;
  return hull;
}

/// Incremental 3-D hull. Returns a hull with zero volume and no faces if the
/// cloud is (numerically) flat.
inline ConvexHull convex_hull_3d(const Mat& P) {
  require_dims(P.rows() == 3, "hull_3d: points must be 3-D");
  ConvexHull hull;
  hull.dim = 3;
  hull.scale = detail::extent(P);
  const Eigen::Index n = P.cols();
  const double eps = 1e-12 * hull.scale;
  if (n < 4) return hull;

  // Initial tetrahedron from extreme points.
  Eigen::Index i0 = 0, i1 = 0;
  P.row(0).minCoeff(&i0);
  double best = -1;
  for (Eigen::Index i = 0; i < n; ++i)
    if (double dd = (P.col(i) - P.col(i0)).squaredNorm(); dd > best) best = dd, i1 = i;
  if (best <= eps * eps) return hull;
  const Eigen::Vector3d a = P.col(i0), b = P.col(i1);
  Eigen::Index i2 = -1;
  best = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = P.col(i);
    if (double dd = (b - a).cross(p - a).norm(); dd > best) best = dd, i2 = i;
  }
  if (i2 < 0 || best <= eps * hull.scale) return hull;
  const Eigen::Vector3d c = P.col(i2);
  const Eigen::Vector3d n0 = (b - a).cross(c - a);
  Eigen::Index i3 = -1;
  best = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = P.col(i);
    if (double dd = std::abs(n0.dot(p - a)); dd > best) best = dd, i3 = i;
  }
  if (i3 < 0 || best <= eps * n0.norm()) return hull;

  struct Face {
    std::array<Eigen::Index, 3> v;
    Eigen::Vector3d nrm;
    double off;
    bool alive;
  };
  std::vector<Face> faces;
  auto pt = [&](Eigen::Index i) -> Eigen::Vector3d { return P.col(i); };
  auto make = [&](Eigen::Index x, Eigen::Index y, Eigen::Index z) {
    Eigen::Vector3d nrm = (pt(y) - pt(x)).cross(pt(z) - pt(x));
    nrm.normalize();
    faces.push_back({{x, y, z}, nrm, nrm.dot(pt(x)), true});
  };
  const Eigen::Vector3d inner = 0.25 * (pt(i0) + pt(i1) + pt(i2) + pt(i3));
  auto oriented = [&](Eigen::Index x, Eigen::Index y, Eigen::Index z) {
    const Eigen::Vector3d nrm = (pt(y) - pt(x)).cross(pt(z) - pt(x));
    if (nrm.dot(inner - pt(x)) > 0) std::swap(y, z);
    make(x, y, z);
  };
  oriented(i0, i1, i2);
  oriented(i0, i1, i3);
  oriented(i0, i2, i3);
  oriented(i1, i2, i3);

  std::map<std::pair<Eigen::Index, Eigen::Index>, int> edge_owner;
  std::vector<size_t> visible;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    const Eigen::Vector3d p = pt(i);
    visible.clear();
    for (size_t f = 0; f < faces.size(); ++f)
      if (faces[f].alive && faces[f].nrm.dot(p) - faces[f].off > eps) visible.push_back(f);
    if (visible.empty()) continue;
    edge_owner.clear();
    for (size_t f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) edge_owner[{v[e], v[(e + 1) % 3]}] = 1;
    }
    std::vector<std::pair<Eigen::Index, Eigen::Index>> horizon;
    for (const auto& [edge, _] : edge_owner)
      if (!edge_owner.count({edge.second, edge.first})) horizon.push_back(edge);
    for (size_t f : visible) faces[f].alive = false;
    for (const auto& [x, y] : horizon) make(x, y, i);
    if (faces.size() > 4 * static_cast<size_t>(n) + 64) {  // compact dead faces
      std::vector<Face> keep;
      for (auto& f : faces)
        if (f.alive) keep.push_back(f);
      faces.swap(keep);
    }
  }

  std::vector<Eigen::Index> verts;
  double vol = 0.0;
  int count = 0;
  for (const auto& f : faces)
    if (f.alive) ++count;
  hull.normals.resize(3, count);
  hull.offsets.resize(count);
  int k = 0;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    hull.normals.col(k) = f.nrm;
    hull.offsets[k] = f.off;
    ++k;
    vol += (pt(f.v[0]) - inner).dot((pt(f.v[1]) - inner).cross(pt(f.v[2]) - inner)) / 6.0;
    verts.insert(verts.end(), f.v.begin(), f.v.end());
  }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  hull.vertices = std::move(verts);
  hull.volume = vol;
  return hull;
}

inline ConvexHull convex_hull_1d(const Mat& P) {
  ConvexHull hull;
  hull.dim = 1;
  hull.scale = detail::extent(P);
  Eigen::Index lo = 0, hi = 0;
  P.row(0).minCoeff(&lo);
  P.row(0).maxCoeff(&hi);
  hull.vertices = {lo, hi};
  hull.normals.resize(1, 2);
  hull.normals << -1.0, 1.0;
  hull.offsets.resize(2);
  hull.offsets << -P(0, lo), P(0, hi);
  hull.volume = P(0, hi) - P(0, lo);
  return hull;
}

/// Exact hull for dimension 1, 2 or 3.
inline ConvexHull convex_hull(const Mat& P) {
  if (P.cols() == 0) throw Error("convex_hull: empty point set");
  switch (P.rows()) {
    case 1: return convex_hull_1d(P);
    case 2: return convex_hull_2d(P);
    case 3: return convex_hull_3d(P);
    default: throw Error("convex_hull: exact hulls are limited to dimension <= 3");
  }
}

/// Membership in conv(P) by Gilbert's min-norm-point iteration on P - q.
/// Stops with "outside" as soon as a separating hyperplane is found and with
/// "inside" once the distance drops below tol * scale.
struct HullMembership {
  bool inside = false;
  double distance = 0.0;
  int iterations = 0;
};

inline HullMembership hull_contains(const Mat& P, const Vec& q, double scale, double tol = 1e-6,
                                    int max_iter = 5000) {
  require_dims(P.rows() == q.size(), "hull_contains: dimension mismatch");
  HullMembership r;
  Eigen::Index start = 0;
  (P.colwise() - q).colwise().squaredNorm().minCoeff(&start);
  Vec x = P.col(start) - q;
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    const double xx = x.squaredNorm();
    r.distance = std::sqrt(xx);
    if (r.distance <= tol * scale) {
      r.inside = true;
      return r;
    }
    Eigen::Index s = 0;
    const double sv = ((P.transpose() * x).array() - x.dot(q)).minCoeff(&s);
    if (sv > 0) return r;  // every vertex is on the far side of the plane x . y = 0
    const Vec d = (P.col(s) - q) - x;
    const double dd = d.squaredNorm();
    if (dd <= 0) break;
    const double step = std::clamp(-x.dot(d) / dd, 0.0, 1.0);
    if (step <= 0) break;
    x += step * d;
  }
  r.distance = x.norm();
  r.inside = r.distance <= tol * scale;
  return r;
}

}  // namespace lpvred

#endif  // LPVRED_HULL_HPP
