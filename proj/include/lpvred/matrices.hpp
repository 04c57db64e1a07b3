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
    Block state-space matrices and their column-major vectorization Gamma.

    The block matrix is laid out as

        [ A  Bu  Bw ]
        [ C  Du  Dw ]

    and Gamma = vec(block) stacks its columns.
*/

#ifndef LPVRED_MATRICES_HPP
#define LPVRED_MATRICES_HPP

#include "core.hpp"

#include <algorithm>
#include <string>

namespace lpvred {

/// Which blocks a Gamma vector covers.
enum class GammaBlocks {
  StateInput,  ///< [A Bu] only (wind excluded)
  All,         ///< all six blocks
};

inline std::string to_string(GammaBlocks b) { return b == GammaBlocks::All ? "all" : "state_input"; }

inline GammaBlocks gamma_blocks_from_string(const std::string& s) {
  if (s == "all") return GammaBlocks::All;
  if (s == "state_input" || s == "ab") return GammaBlocks::StateInput;
  throw Error("unknown gamma block selection '" + s + "'");
}

struct GammaLayout {
  ModelDims dims;
  GammaBlocks blocks = GammaBlocks::StateInput;

  int rows() const { return blocks == GammaBlocks::All ? dims.nx + dims.ny : dims.nx; }
  int cols() const {
    return blocks == GammaBlocks::All ? dims.nx + dims.nu + dims.nw : dims.nx + dims.nu;
  }
  int size() const { return rows() * cols(); }

  /// Position of block-matrix entry (row, col) inside Gamma.
  int index(int row, int col) const { return col * rows() + row; }
};

struct FactorizedMatrices {
  Mat A, Bu, Bw, C, Du, Dw;

  /// Full (nx+ny) x (nx+nu+nw) block matrix.
  Mat block_matrix() const {
    const Eigen::Index nx = A.rows(), nu = Bu.cols(), nw = Bw.cols(), ny = C.rows();
    Mat M = Mat::Zero(nx + ny, nx + nu + nw);
    M.block(0, 0, nx, nx) = A;
    if (nu > 0) M.block(0, nx, nx, nu) = Bu;
    if (nw > 0) M.block(0, nx + nu, nx, nw) = Bw;
    if (ny > 0) {
      M.block(nx, 0, ny, nx) = C;
      if (nu > 0) M.block(nx, nx, ny, nu) = Du;
      if (nw > 0) M.block(nx, nx + nu, ny, nw) = Dw;
    }
    return M;
  }

  Vec gamma(const GammaLayout& layout) const {
    const Mat M = block_matrix();
    const Mat sub = M.topLeftCorner(layout.rows(), layout.cols());
    return Eigen::Map<const Vec>(sub.data(), sub.size());
  }
};

namespace detail {
inline Eigen::Index present_rows(const Mat& m) { return m.size() == 0 ? 0 : m.rows(); }
inline Eigen::Index present_cols(const Mat& m) { return m.size() == 0 ? 0 : m.cols(); }

inline void place(Mat& M, const Mat& blk, Eigen::Index r0, Eigen::Index c0, Eigen::Index r,
                  Eigen::Index c, const char* name) {
  if (blk.size() == 0) return;
  require_dims(blk.rows() == r && blk.cols() == c,
               std::string("vec_gamma: block ") + name + " has inconsistent shape");
  M.block(r0, c0, r, c) = blk;
}
}  // namespace detail

/// Column-major vectorization of the block matrix. Empty blocks are allowed
/// and take their shape from the neighbouring blocks (zero-filled).
inline Vec vec_gamma(const Mat& A, const Mat& Bu, const Mat& Bw, const Mat& C, const Mat& Du,
                     const Mat& Dw) {
  using detail::present_cols;
  using detail::present_rows;
  const Eigen::Index top = std::max({present_rows(A), present_rows(Bu), present_rows(Bw)});
  const Eigen::Index bot = std::max({present_rows(C), present_rows(Du), present_rows(Dw)});
  const Eigen::Index c1 = std::max(present_cols(A), present_cols(C));
  const Eigen::Index c2 = std::max(present_cols(Bu), present_cols(Du));
  const Eigen::Index c3 = std::max(present_cols(Bw), present_cols(Dw));
  Mat M = Mat::Zero(top + bot, c1 + c2 + c3);
  detail::place(M, A, 0, 0, top, c1, "A");
  detail::place(M, Bu, 0, c1, top, c2, "Bu");
  detail::place(M, Bw, 0, c1 + c2, top, c3, "Bw");
  detail::place(M, C, top, 0, bot, c1, "C");
  detail::place(M, Du, top, c1, bot, c2, "Du");
  detail::place(M, Dw, top, c1 + c2, bot, c3, "Dw");
  return Eigen::Map<const Vec>(M.data(), M.size());
}

/// Inverse of the vectorization for a known block-matrix shape.
inline Mat unvec(const Vec& gamma, Eigen::Index rows, Eigen::Index cols) {
  require_dims(gamma.size() == rows * cols, "unvec: length does not match the requested shape");
  return Eigen::Map<const Mat>(gamma.data(), rows, cols);
}

inline Mat unvec_gamma(const Vec& gamma, const GammaLayout& layout) {
  return unvec(gamma, layout.rows(), layout.cols());
}

/// Splits a block matrix of the given layout back into its named blocks.
/// Blocks outside the layout come back empty-shaped but zero.
inline FactorizedMatrices split_blocks(const Mat& M, const ModelDims& d) {
  require_dims(M.cols() >= d.nx + d.nu && M.rows() >= d.nx, "split_blocks: matrix too small");
  FactorizedMatrices out;
  out.A = M.block(0, 0, d.nx, d.nx);
  out.Bu = M.block(0, d.nx, d.nx, d.nu);
  const bool has_w = M.cols() >= d.nx + d.nu + d.nw;
  const bool has_y = M.rows() >= d.nx + d.ny;
  out.Bw = has_w ? Mat(M.block(0, d.nx + d.nu, d.nx, d.nw)) : Mat::Zero(d.nx, d.nw);
  out.C = has_y ? Mat(M.block(d.nx, 0, d.ny, d.nx)) : Mat::Zero(d.ny, d.nx);
  out.Du = has_y ? Mat(M.block(d.nx, d.nx, d.ny, d.nu)) : Mat::Zero(d.ny, d.nu);
  out.Dw = (has_y && has_w) ? Mat(M.block(d.nx, d.nx + d.nu, d.ny, d.nw)) : Mat::Zero(d.ny, d.nw);
  return out;
}

}  // namespace lpvred

#endif  // LPVRED_MATRICES_HPP
