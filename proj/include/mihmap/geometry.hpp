// Copyright 2026 The Authors.
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

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "mihmap/mih_index.hpp"

namespace mihmap {

template <typename Scalar>
using Vector2T = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector6T = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Matrix2T = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Matrix3T = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix6T = Eigen::Matrix<Scalar, 6, 6>;
template <typename Scalar>
using Matrix26T = Eigen::Matrix<Scalar, 2, 6>;

/// Camera-frame depth at or below which a point counts as behind the camera.
inline constexpr double kMinDepth = 1e-6;

template <typename Derived>
Matrix3T<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Matrix3T<Scalar> m;
  m << Scalar(0), -v(2), v(1),
       v(2), Scalar(0), -v(0),
       -v(1), v(0), Scalar(0);
  return m;
}

template <typename Derived>
Matrix3T<typename Derived::Scalar> so3_exp(const Eigen::MatrixBase<Derived>& omega) {
  using Scalar = typename Derived::Scalar;
  const Scalar theta = omega.norm();
  if (theta < Scalar(1e-12)) return Matrix3T<Scalar>::Identity() + skew(omega);
  return Eigen::AngleAxis<Scalar>(theta, omega / theta).toRotationMatrix();
}

// Left Jacobian of SO(3); maps the translational twist into SE(3).
template <typename Derived>
Matrix3T<typename Derived::Scalar> so3_left_jacobian(
    const Eigen::MatrixBase<Derived>& omega) {
  using Scalar = typename Derived::Scalar;
  const Scalar theta = omega.norm();
  const Matrix3T<Scalar> k = skew(omega);
  if (theta < Scalar(1e-6)) {
    return Matrix3T<Scalar>::Identity() + Scalar(0.5) * k + k * k / Scalar(6);
  }
  const Scalar theta2 = theta * theta;
  return Matrix3T<Scalar>::Identity() + (Scalar(1) - std::cos(theta)) / theta2 * k +
         (theta - std::sin(theta)) / (theta2 * theta) * k * k;
}

/// World-to-camera rigid transform: x_cam = rotation * x_world + translation.
template <typename Scalar>
struct CameraPoseT {
  Matrix3T<Scalar> rotation = Matrix3T<Scalar>::Identity();
  Vector3T<Scalar> translation = Vector3T<Scalar>::Zero();

  static CameraPoseT Identity() { return {}; }

  /// Pose of a camera at `center` whose camera-to-world rotation is
  /// `camera_to_world`.
  static CameraPoseT FromCenter(const Matrix3T<Scalar>& camera_to_world,
                                const Vector3T<Scalar>& center) {
    CameraPoseT pose;
    pose.rotation = camera_to_world.transpose();
    pose.translation = -pose.rotation * center;
    return pose;
  }

  Vector3T<Scalar> transform(const Vector3T<Scalar>& p) const {
    return rotation * p + translation;
  }
  Vector3T<Scalar> camera_center() const {
    return -rotation.transpose() * translation;
  }

  /// Right-multiplied SE(3) exponential: this * Exp(delta), with delta =
  /// (rotation 3, translation 3).
  CameraPoseT retract(const Vector6T<Scalar>& delta) const {
    const Vector3T<Scalar> omega = delta.template head<3>();
    const Vector3T<Scalar> v = delta.template tail<3>();
    CameraPoseT out;
    out.rotation = rotation * so3_exp(omega);
    out.translation = rotation * (so3_left_jacobian(omega) * v) + translation;
    return out;
  }

  bool is_valid(Scalar tol = Scalar(1e-9)) const {
    const Matrix3T<Scalar> gram = rotation.transpose() * rotation;
    return (gram - Matrix3T<Scalar>::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - Scalar(1)) <= tol;
  }

  template <typename Other>
  CameraPoseT<Other> cast() const {
    CameraPoseT<Other> out;
    out.rotation = rotation.template cast<Other>();
    out.translation = translation.template cast<Other>();
    return out;
  }
};

template <typename Scalar>
struct PinholeModelT {
  Scalar fx = Scalar(1);
  Scalar fy = Scalar(1);
  Scalar cx = Scalar(0);
  Scalar cy = Scalar(0);

  bool is_valid() const { return fx > Scalar(0) && fy > Scalar(0); }
};

/// A 2D measurement associated with a 3D map point.
template <typename Scalar>
struct FeatureMatchT {
  PointId point_id = 0;
  Vector3T<Scalar> world_point = Vector3T<Scalar>::Zero();
  Vector2T<Scalar> measurement = Vector2T<Scalar>::Zero();
  /// Inverse measurement covariance in pixels^-2. Isotropic sigma = 1 px by
  /// default.
  Matrix2T<Scalar> residual_information = Matrix2T<Scalar>::Identity();
};

/// Pinhole projection of a world point. Empty if the point is at or behind
/// kMinDepth in the camera frame.
template <typename Scalar>
std::optional<Vector2T<Scalar>> project(const CameraPoseT<Scalar>& pose,
                                        const PinholeModelT<Scalar>& model,
                                        const Vector3T<Scalar>& p) {
  const Vector3T<Scalar> pc = pose.transform(p);
  if (pc.z() <= Scalar(kMinDepth)) return std::nullopt;
  return Vector2T<Scalar>(model.fx * pc.x() / pc.z() + model.cx,
                          model.fy * pc.y() / pc.z() + model.cy);
}

/// d project(pose.retract(delta), p) / d delta at delta = 0.
template <typename Scalar>
std::optional<Matrix26T<Scalar>> measurement_jacobian(
    const CameraPoseT<Scalar>& pose, const PinholeModelT<Scalar>& model,
    const Vector3T<Scalar>& p) {
  const Vector3T<Scalar> pc = pose.transform(p);
  if (pc.z() <= Scalar(kMinDepth)) return std::nullopt;
  const Scalar inv_z = Scalar(1) / pc.z();
  Eigen::Matrix<Scalar, 2, 3> d_proj;
  d_proj << model.fx * inv_z, Scalar(0), -model.fx * pc.x() * inv_z * inv_z,
            Scalar(0), model.fy * inv_z, -model.fy * pc.y() * inv_z * inv_z;
  Eigen::Matrix<Scalar, 3, 6> d_point;
  d_point.template leftCols<3>() = -pose.rotation * skew(p);
  d_point.template rightCols<3>() = pose.rotation;
  return Matrix26T<Scalar>(d_proj * d_point);
}

/// H^T * Omega_r * H for one match: the pose information it contributes.
template <typename Scalar>
std::optional<Matrix6T<Scalar>> pose_info_single(const FeatureMatchT<Scalar>& match,
                                                 const CameraPoseT<Scalar>& pose,
                                                 const PinholeModelT<Scalar>& model) {
  const auto h = measurement_jacobian(pose, model, match.world_point);
  if (!h) return std::nullopt;
  Matrix6T<Scalar> info = h->transpose() * match.residual_information * (*h);
  return Matrix6T<Scalar>(Scalar(0.5) * (info + info.transpose()));
}

/// log det(information + damping * I), natural log, via Cholesky.
template <typename Derived>
typename Derived::Scalar logdet_damped(const Eigen::MatrixBase<Derived>& information,
                                       typename Derived::Scalar damping) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime,
                               Derived::ColsAtCompileTime>;
  Matrix damped = information;
  damped.diagonal().array() += damping;
  Eigen::LLT<Matrix> llt(damped);
  if (llt.info() == Eigen::Success) {
    return Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
  }
  Eigen::LDLT<Matrix> ldlt(damped);
  const auto d = ldlt.vectorD();
  if ((d.array() <= Scalar(0)).any()) return -std::numeric_limits<Scalar>::infinity();
  return d.array().log().sum();
}

/// Damped logDet of the summed pose information over a match set. Matches
/// behind the camera contribute nothing.
template <typename Scalar>
Scalar logdet_metric(std::span<const FeatureMatchT<Scalar>> matches,
                     const CameraPoseT<Scalar>& pose,
                     const PinholeModelT<Scalar>& model, Scalar damping) {
  Matrix6T<Scalar> sum = Matrix6T<Scalar>::Zero();
  for (const auto& m : matches) {
    if (auto info = pose_info_single(m, pose, model)) sum += *info;
  }
  return logdet_damped(sum, damping);
}

enum class RefineStatus { kConverged, kMaxIterations, kSingular, kTooFewMatches };

inline std::string_view to_string(RefineStatus status) {
  switch (status) {
    case RefineStatus::kConverged:
      return "converged";
    case RefineStatus::kMaxIterations:
      return "max_iterations";
    case RefineStatus::kSingular:
      return "singular";
    case RefineStatus::kTooFewMatches:
      return "too_few_matches";
  }
  return "unknown";
}

template <typename Scalar>
struct RefineOptions {
  int max_iterations = 10;
  /// Stop once an accepted step lowers the cost by less than this.
  Scalar cost_tolerance = Scalar(1e-10);
  /// Normal matrices whose eigenvalue ratio falls below this are singular.
  Scalar singular_ratio = Scalar(1e-12);
};

template <typename Scalar>
struct RefineResult {
  CameraPoseT<Scalar> pose;
  Scalar initial_cost = Scalar(0);
  Scalar final_cost = Scalar(0);
  int iterations = 0;
  RefineStatus status = RefineStatus::kConverged;

  bool ok() const {
    return status == RefineStatus::kConverged || status == RefineStatus::kMaxIterations;
  }
};

/// Weighted squared reprojection error over the matches in front of the
/// camera, and how many those were.
template <typename Scalar>
std::pair<Scalar, int> reprojection_cost(const CameraPoseT<Scalar>& pose,
                                         const PinholeModelT<Scalar>& model,
                                         std::span<const FeatureMatchT<Scalar>> matches) {
  Scalar cost(0);
  int used = 0;
  for (const auto& m : matches) {
    const auto uv = project(pose, model, m.world_point);
    if (!uv) continue;
    const Vector2T<Scalar> r = *uv - m.measurement;
    cost += r.dot(m.residual_information * r);
    ++used;
  }
  return {cost, used};
}

/// Gauss-Newton on the pose only, minimizing the information-weighted
/// reprojection error. Steps that would raise the cost are rejected and end
/// the iteration.
template <typename Scalar>
RefineResult<Scalar> gauss_newton_refine(const CameraPoseT<Scalar>& initial,
                                         const PinholeModelT<Scalar>& model,
                                         std::span<const FeatureMatchT<Scalar>> matches,
                                         const RefineOptions<Scalar>& options = {}) {
  RefineResult<Scalar> result;
  result.pose = initial;
  auto [cost, used] = reprojection_cost(initial, model, matches);
  result.initial_cost = result.final_cost = cost;
  if (used < 3) {
    result.status = RefineStatus::kTooFewMatches;
    return result;
  }
  result.status = RefineStatus::kMaxIterations;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    Matrix6T<Scalar> normal = Matrix6T<Scalar>::Zero();
    Vector6T<Scalar> gradient = Vector6T<Scalar>::Zero();
    for (const auto& m : matches) {
      const auto uv = project(result.pose, model, m.world_point);
      const auto h = measurement_jacobian(result.pose, model, m.world_point);
      if (!uv || !h) continue;
      const Vector2T<Scalar> r = *uv - m.measurement;
      const Eigen::Matrix<Scalar, 6, 2> ht_info = h->transpose() * m.residual_information;
      normal.noalias() += ht_info * (*h);
      gradient.noalias() += ht_info * r;
    }
    Eigen::SelfAdjointEigenSolver<Matrix6T<Scalar>> eig(normal, Eigen::EigenvaluesOnly);
    const Scalar max_eig = eig.eigenvalues().maxCoeff();
    if (!(max_eig > Scalar(0)) ||
        eig.eigenvalues().minCoeff() <= options.singular_ratio * max_eig) {
      result.status = RefineStatus::kSingular;
      return result;
    }
    const Vector6T<Scalar> delta = -normal.ldlt().solve(gradient);
    const CameraPoseT<Scalar> candidate = result.pose.retract(delta);
    const auto [new_cost, new_used] = reprojection_cost(candidate, model, matches);
    result.iterations = iter;
    if (new_used < 3 || !(new_cost <= cost)) {
      result.status = RefineStatus::kConverged;
      break;
    }
    const Scalar decrease = cost - new_cost;
    result.pose = candidate;
    cost = new_cost;
    result.final_cost = cost;
    if (decrease < options.cost_tolerance) {
      result.status = RefineStatus::kConverged;
      break;
    }
  }
  return result;
}

/// Angle in radians of the relative rotation between two poses.
template <typename Scalar>
Scalar rotation_error(const CameraPoseT<Scalar>& a, const CameraPoseT<Scalar>& b) {
  const Matrix3T<Scalar> rel = a.rotation * b.rotation.transpose();
  const Vector3T<Scalar> axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0),
                              rel(1, 0) - rel(0, 1));
  return std::atan2(Scalar(0.5) * axis.norm(), Scalar(0.5) * (rel.trace() - Scalar(1)));
}

/// Distance in meters between the two camera centers.
template <typename Scalar>
Scalar translation_error(const CameraPoseT<Scalar>& a, const CameraPoseT<Scalar>& b) {
  return (a.camera_center() - b.camera_center()).norm();
}

using Vector2 = Vector2T<double>;
using Vector3 = Vector3T<double>;
using Vector6 = Vector6T<double>;
using Matrix2 = Matrix2T<double>;
using Matrix3 = Matrix3T<double>;
using Matrix6 = Matrix6T<double>;
using Matrix26 = Matrix26T<double>;
using CameraPose = CameraPoseT<double>;
using PinholeModel = PinholeModelT<double>;
using FeatureMatch = FeatureMatchT<double>;

}  // namespace mihmap
