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
    Single rigid-body parafoil return vehicle.

    State x = [r; eta; v; omega] (position in an Earth-centred frame with z
    pointing away from the centre, ZYX Euler angles roll/pitch/yaw, body
    velocity, body rates), input u = delta (left/right brake in [0,1]) and
    wind w in the Earth frame.

        r'     = R(eta) v
        eta'   = J(eta) omega
        v'     = -omega x v + (Fa + Fg) / m
        omega' = I^-1 (-omega x I omega + Ma)

    Gravity is the point-mass field Fg = -m mu R^T r / |r|^3. Air density
    decays exponentially with altitude. Aerodynamics act on the body-frame
    airspeed a = v - R^T w and are polynomial in a, omega and delta; with
    q = rho S / 2,

        Fx = q [ -(CD Vr + CDq ax) ax - CL Vr az - CDd ax (d1 + d2) ]
        Fy = q [ -CY Vr ay + CYd ax (d1 - d2) ]
        Fz = q [ (CL Vr + CLq ax) ax - CD Vr az + CLd ax (d1 + d2) ]
        Mx = q L [ Clb ay - Clp L omega_x ]
        My = q L [ Cma (az + a0 ax) - Cmq L omega_y + Cmd ax (d1 + d2) ]
        Mz = q L [ Cnb ay - Cnr L omega_z + Cnd ax (d1 - d2) ]

    The coefficients are made up with plausible magnitudes for a 2.5 t
    vehicle under a 700 m^2 canopy; they are not fitted to any vehicle.

    Factorization: rotation kinematics go to the v and omega columns, the
    cross products -omega x v and -omega x I omega to the v and omega
    columns (v and omega carry the larger magnitudes), gravity to the r
    columns, aerodynamic monomials with a delta factor to Bu, the remaining
    aerodynamic monomials to the airspeed columns, which split into A (v)
    and Bw (-R^T).
*/

#ifndef LPVRED_MODELS_PARAFOIL_HPP
#define LPVRED_MODELS_PARAFOIL_HPP

#include "../model.hpp"

#include <algorithm>
#include <numbers>

namespace lpvred {

struct ParafoilParams {
  double mass = 2500.0;                 // kg
  double ixx = 3.0e4, iyy = 2.5e4, izz = 1.5e4, ixz = 1.0e3;  // kg m^2
  double mu = 3.986004418e14;           // m^3/s^2
  double earth_radius = 6.371e6;        // m
  double rho0 = 1.225;                  // kg/m^3 at sea level
  double scale_height = 8500.0;         // m
  double area = 700.0;                  // m^2
  double ref_length = 10.0;             // m
  double ref_speed = 16.0;              // m/s

  double cd = 0.11, cdq = 0.002, cl = 0.33, clq = 0.005, cy = 0.2;
  double cd_delta = 0.05, cy_delta = 0.03, cl_delta = 0.05;
  double cl_beta = 0.05, cl_p = 0.2;
  double cm_alpha = -0.05, alpha0 = 1.0 / 3.0, cm_q = 0.05, cm_delta = 0.002;
  double cn_beta = 0.03, cn_r = 0.1, cn_delta = 0.007;

  nlohmann::json to_json() const {
    return {{"mass", mass},         {"ixx", ixx},
            {"iyy", iyy},           {"izz", izz},
            {"ixz", ixz},           {"mu", mu},
            {"earth_radius", earth_radius}, {"rho0", rho0},
            {"scale_height", scale_height}, {"area", area},
            {"ref_length", ref_length},     {"ref_speed", ref_speed},
            {"cd", cd},             {"cdq", cdq},
            {"cl", cl},             {"clq", clq},
            {"cy", cy},             {"cd_delta", cd_delta},
            {"cy_delta", cy_delta}, {"cl_delta", cl_delta},
            {"cl_beta", cl_beta},   {"cl_p", cl_p},
            {"cm_alpha", cm_alpha}, {"alpha0", alpha0},
            {"cm_q", cm_q},         {"cm_delta", cm_delta},
            {"cn_beta", cn_beta},   {"cn_r", cn_r},
            {"cn_delta", cn_delta}};
  }

  /// Applies any keys present in `j`; unknown keys are rejected.
  static ParafoilParams from_json(const nlohmann::json& j) {
    ParafoilParams p;
    nlohmann::json all = p.to_json();
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!all.contains(it.key())) throw Error("unknown parafoil parameter '" + it.key() + "'");
      all[it.key()] = it.value().get<double>();
    }
    p.mass = all["mass"]; p.ixx = all["ixx"]; p.iyy = all["iyy"]; p.izz = all["izz"];
    p.ixz = all["ixz"]; p.mu = all["mu"]; p.earth_radius = all["earth_radius"];
    p.rho0 = all["rho0"]; p.scale_height = all["scale_height"]; p.area = all["area"];
    p.ref_length = all["ref_length"]; p.ref_speed = all["ref_speed"];
    p.cd = all["cd"]; p.cdq = all["cdq"]; p.cl = all["cl"]; p.clq = all["clq"]; p.cy = all["cy"];
    p.cd_delta = all["cd_delta"]; p.cy_delta = all["cy_delta"]; p.cl_delta = all["cl_delta"];
    p.cl_beta = all["cl_beta"]; p.cl_p = all["cl_p"]; p.cm_alpha = all["cm_alpha"];
    p.alpha0 = all["alpha0"]; p.cm_q = all["cm_q"]; p.cm_delta = all["cm_delta"];
    p.cn_beta = all["cn_beta"]; p.cn_r = all["cn_r"]; p.cn_delta = all["cn_delta"];
    return p;
  }
};

class ParafoilModel final : public FactorizedModel {
 public:
  explicit ParafoilModel(ParafoilParams p = {}) : p_(p) {
    inertia_ << p_.ixx, 0, p_.ixz,  //
        0, p_.iyy, 0,               //
        p_.ixz, 0, p_.izz;
    inertia_inv_ = inertia_.inverse();
  }

  const ParafoilParams& params() const { return p_; }

  std::string id() const override { return "parafoil"; }
  ModelDims dims() const override { return {12, 2, 3, 12}; }

  /// Pitch is kept away from the Euler-angle singularity at +-pi/2.
  OperatingRegion operating_region() const override {
    const double pi = std::numbers::pi;
    OperatingRegion r;
    r.x = {{-3e3, 3e3}, {-3e3, 3e3}, {6.3e6, 6.4e6},  //
           {-pi, pi},   {-1.3, 1.3}, {-pi, pi},       //
           {-50, 50},   {-50, 50},   {-50, 50},       //
           {-0.1, 0.1}, {-0.1, 0.1}, {-0.1, 0.1}};
    r.u = {{0, 1}, {0, 1}};
    r.w = {{-18, 18}, {-18, 18}, {-18, 18}};
    return r;
  }

  StateSpacePoint reference_point() const override {
    Vec x = Vec::Zero(12);
    x[2] = p_.earth_radius + 5500.0;
    x[6] = 15.0;
    x[8] = -5.0;
    return {x, Vec::Constant(2, 0.5), Vec::Zero(3)};
  }

  /// Gliding descent from 4.5-5.5 km with random heading.
  Vec sample_initial_state(std::mt19937_64& rng) const override {
    auto U = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    Vec x(12);
    x << U(-2e3, 2e3), U(-2e3, 2e3), p_.earth_radius + U(4500.0, 5500.0),  //
        U(-0.1, 0.1), U(-0.1, 0.1), U(-std::numbers::pi, std::numbers::pi),   //
        15.0 + U(-2.0, 2.0), U(-1.0, 1.0), -5.0 + U(-1.0, 1.0),              //
        U(-0.02, 0.02), U(-0.02, 0.02), U(-0.02, 0.02);
    return x;
  }

  std::vector<int> angular_states() const override { return {3, 4, 5}; }

  nlohmann::json parameters() const override { return p_.to_json(); }

  static Eigen::Matrix3d rotation(double phi, double theta, double psi) {
    const double cf = std::cos(phi), sf = std::sin(phi);
    const double ct = std::cos(theta), st = std::sin(theta);
    const double cp = std::cos(psi), sp = std::sin(psi);
    Eigen::Matrix3d R;
    R << cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf,  //
        sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf,   //
        -st, ct * sf, ct * cf;
    return R;
  }

  static Eigen::Matrix3d euler_rates(double phi, double theta) {
    const double cf = std::cos(phi), sf = std::sin(phi);
    const double ct = std::cos(theta), tt = std::tan(theta);
    Eigen::Matrix3d J;
    J << 1, sf * tt, cf * tt,  //
        0, cf, -sf,            //
        0, sf / ct, cf / ct;
    return J;
  }

  double density(const Eigen::Vector3d& r) const {
    return p_.rho0 * std::exp(-(r.norm() - p_.earth_radius) / p_.scale_height);
  }

  Vec f(const StateSpacePoint& pt) const override {
    const auto& x = pt.x;
    const Eigen::Vector3d r = x.segment<3>(0), eta = x.segment<3>(3), v = x.segment<3>(6),
                          om = x.segment<3>(9);
    const Eigen::Vector3d w = pt.w.head<3>();
    const double d1 = pt.u[0], d2 = pt.u[1];
    const Eigen::Matrix3d R = rotation(eta[0], eta[1], eta[2]);
    const Eigen::Vector3d a = v - R.transpose() * w;
    const double q = 0.5 * density(r) * p_.area, L = p_.ref_length, Vr = p_.ref_speed;

    Eigen::Vector3d fa;
    fa[0] = q * (-(p_.cd * Vr + p_.cdq * a[0]) * a[0] - p_.cl * Vr * a[2] - p_.cd_delta * a[0] * (d1 + d2));
    fa[1] = q * (-p_.cy * Vr * a[1] + p_.cy_delta * a[0] * (d1 - d2));
    fa[2] = q * ((p_.cl * Vr + p_.clq * a[0]) * a[0] - p_.cd * Vr * a[2] + p_.cl_delta * a[0] * (d1 + d2));
    Eigen::Vector3d ma;
    ma[0] = q * L * (p_.cl_beta * a[1] - p_.cl_p * L * om[0]);
    ma[1] = q * L * (p_.cm_alpha * (a[2] + p_.alpha0 * a[0]) - p_.cm_q * L * om[1] + p_.cm_delta * a[0] * (d1 + d2));
    ma[2] = q * L * (p_.cn_beta * a[1] - p_.cn_r * L * om[2] + p_.cn_delta * a[0] * (d1 - d2));

    const double rn = r.norm();
    const Eigen::Vector3d fg = -p_.mass * p_.mu / (rn * rn * rn) * (R.transpose() * r);

    Vec xdot(12);
    xdot.segment<3>(0) = R * v;
    xdot.segment<3>(3) = euler_rates(eta[0], eta[1]) * om;
    xdot.segment<3>(6) = -om.cross(v) + (fa + fg) / p_.mass;
    xdot.segment<3>(9) = inertia_inv_ * (-om.cross(inertia_ * om) + ma);
    return xdot;
  }

  FactorizedMatrices factorize(const StateSpacePoint& pt) const override {
    const auto& x = pt.x;
    const Eigen::Vector3d r = x.segment<3>(0), eta = x.segment<3>(3), v = x.segment<3>(6),
                          om = x.segment<3>(9);
    const Eigen::Vector3d w = pt.w.head<3>();
    const Eigen::Matrix3d R = rotation(eta[0], eta[1], eta[2]);
    const Eigen::Vector3d a = v - R.transpose() * w;
    const double q = 0.5 * density(r) * p_.area, L = p_.ref_length, Vr = p_.ref_speed;
    const double ax = a[0];

    // Fa = Kv a + Kd delta, Ma = Qv a + Qw omega + Qd delta
    Eigen::Matrix3d Kv;
    Kv << -(p_.cd * Vr + p_.cdq * ax), 0, -p_.cl * Vr,  //
        0, -p_.cy * Vr, 0,                              //
        p_.cl * Vr + p_.clq * ax, 0, -p_.cd * Vr;
    Kv *= q;
    Eigen::Matrix<double, 3, 2> Kd;
    Kd << -p_.cd_delta * ax, -p_.cd_delta * ax,  //
        p_.cy_delta * ax, -p_.cy_delta * ax,     //
        p_.cl_delta * ax, p_.cl_delta * ax;
    Kd *= q;
    Eigen::Matrix3d Qv;
    Qv << 0, p_.cl_beta, 0,                      //
        p_.cm_alpha * p_.alpha0, 0, p_.cm_alpha,  //
        0, p_.cn_beta, 0;
    Qv *= q * L;
    const Eigen::Matrix3d Qw = Eigen::Vector3d(-p_.cl_p, -p_.cm_q, -p_.cn_r).asDiagonal() * (q * L * L);
    Eigen::Matrix<double, 3, 2> Qd;
    Qd << 0, 0,                                  //
        p_.cm_delta * ax, p_.cm_delta * ax,      //
        p_.cn_delta * ax, -p_.cn_delta * ax;
    Qd *= q * L;

    const double rn = r.norm();
    const Eigen::Matrix3d S = skew(om);

    FactorizedMatrices m;
    m.A = Mat::Zero(12, 12);
    m.A.block<3, 3>(0, 6) = R;
    m.A.block<3, 3>(3, 9) = euler_rates(eta[0], eta[1]);
    m.A.block<3, 3>(6, 0) = -p_.mu / (rn * rn * rn) * R.transpose();
    m.A.block<3, 3>(6, 6) = -S + Kv / p_.mass;
    m.A.block<3, 3>(9, 6) = inertia_inv_ * Qv;
    m.A.block<3, 3>(9, 9) = inertia_inv_ * (-S * inertia_ + Qw);
    m.Bu = Mat::Zero(12, 2);
    m.Bu.block<3, 2>(6, 0) = Kd / p_.mass;
    m.Bu.block<3, 2>(9, 0) = inertia_inv_ * Qd;
    m.Bw = Mat::Zero(12, 3);
    m.Bw.block<3, 3>(6, 0) = -Kv * R.transpose() / p_.mass;
    m.Bw.block<3, 3>(9, 0) = -inertia_inv_ * Qv * R.transpose();
    m.C = Mat::Identity(12, 12);
    m.Du = Mat::Zero(12, 2);
    m.Dw = Mat::Zero(12, 3);
    return m;
  }

  std::vector<SchedulingEntry> scheduling_entries() const override {
    std::vector<SchedulingEntry> out;
    auto add_block = [&out](Block b, int r0, int c0, int nr, int nc, const std::string& name,
                            auto keep) {
      for (int c = 0; c < nc; ++c)
        for (int r = 0; r < nr; ++r)
          if (keep(r, c))
            out.push_back({b, r0 + r, c0 + c,
                           name + "(" + std::to_string(r) + "," + std::to_string(c) + ")"});
    };
    auto all = [](int, int) { return true; };
    add_block(Block::A, 6, 0, 3, 3, "gravity", all);
    add_block(Block::A, 0, 6, 3, 3, "R", all);
    add_block(Block::A, 6, 6, 3, 3, "vv", all);
    add_block(Block::A, 9, 6, 3, 3, "omega_v", [](int r, int c) {
      return (r == 1 && c != 1) || (r != 1 && c == 1);
    });
    add_block(Block::A, 3, 9, 3, 3, "J", [](int, int c) { return c > 0; });
    add_block(Block::A, 9, 9, 3, 3, "omega_omega", all);
    add_block(Block::Bu, 6, 0, 3, 2, "force_delta", all);
    add_block(Block::Bu, 9, 0, 3, 2, "moment_delta", all);
    add_block(Block::Bw, 6, 0, 3, 3, "force_wind", all);
    add_block(Block::Bw, 9, 0, 3, 3, "moment_wind", all);
    // Sort into column-major order of [A Bu Bw].
    auto key = [](const SchedulingEntry& e) {
      const int col = e.col + (e.block == Block::Bu ? 12 : 0) + (e.block == Block::Bw ? 14 : 0);
      return col * 12 + e.row;
    };
    std::sort(out.begin(), out.end(), [&key](const auto& a, const auto& b) { return key(a) < key(b); });
    return out;
  }

 private:
  static Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
    Eigen::Matrix3d S;
    S << 0, -v[2], v[1],  //
        v[2], 0, -v[0],   //
        -v[1], v[0], 0;
    return S;
  }

  ParafoilParams p_;
  Eigen::Matrix3d inertia_, inertia_inv_;
};

}  // namespace lpvred

#endif  // LPVRED_MODELS_PARAFOIL_HPP
