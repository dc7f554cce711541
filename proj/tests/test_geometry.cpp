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

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "mihmap/geometry.hpp"

using namespace mihmap;

namespace {

const PinholeModel kModel{500.0, 480.0, 320.0, 240.0};

CameraPose random_pose(std::mt19937_64& rng, double rot = 0.5, double trans = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector6 d;
  for (int i = 0; i < 3; ++i) d[i] = rot * n(rng);
  for (int i = 3; i < 6; ++i) d[i] = trans * n(rng);
  return CameraPose::Identity().retract(d);
}

// A world point in front of `pose` at depth 2..10.
Vector3 point_in_front(std::mt19937_64& rng, const CameraPose& pose) {
  std::uniform_real_distribution<double> xy(-1.5, 1.5), z(2.0, 10.0);
  const Vector3 pc(xy(rng), xy(rng), z(rng));
  return pose.rotation.transpose() * (pc - pose.translation);
}

Eigen::Matrix4d homogeneous(const CameraPose& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = p.rotation;
  m.topRightCorner<3, 1>() = p.translation;
  return m;
}

}  // namespace

TEST_CASE("projection closed form") {
  const auto uv = project(CameraPose::Identity(), kModel, Vector3(1.0, 2.0, 4.0));
  REQUIRE(uv.has_value());
  CHECK((*uv)(0) == doctest::Approx(500.0 * 0.25 + 320.0));
  CHECK((*uv)(1) == doctest::Approx(480.0 * 0.5 + 240.0));
  CHECK_FALSE(project(CameraPose::Identity(), kModel, Vector3(0.0, 0.0, -1.0)).has_value());
  CHECK_FALSE(project(CameraPose::Identity(), kModel, Vector3(1.0, 0.0, 0.0)).has_value());
  CHECK_FALSE(measurement_jacobian(CameraPose::Identity(), kModel, Vector3(0, 0, -2)).has_value());
}

TEST_CASE("translation column on the optical axis") {
  const auto h = measurement_jacobian(CameraPose::Identity(), kModel, Vector3(0.0, 0.0, 5.0));
  REQUIRE(h.has_value());
  CHECK((*h)(0, 3) == doctest::Approx(500.0 / 5.0));
  CHECK((*h)(1, 4) == doctest::Approx(480.0 / 5.0));
  CHECK((*h)(0, 5) == doctest::Approx(0.0));
}

TEST_CASE("jacobian matches central differences") {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const CameraPose pose = random_pose(rng);
    const Vector3 p = point_in_front(rng, pose);
    const auto h = measurement_jacobian(pose, kModel, p);
    REQUIRE(h.has_value());
    Matrix26 fd;
    const double step = 1e-6;
    for (int k = 0; k < 6; ++k) {
      Vector6 d = Vector6::Zero();
      d[k] = step;
      const auto plus = project(pose.retract(d), kModel, p);
      const auto minus = project(pose.retract(-d), kModel, p);
      fd.col(k) = (*plus - *minus) / (2 * step);
    }
    worst = std::max(worst, (*h - fd).norm() / h->norm());
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("retraction equals the 4x4 matrix exponential") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const CameraPose pose = random_pose(rng);
    std::normal_distribution<double> n(0.0, 0.7);
    Vector6 d;
    for (int i = 0; i < 6; ++i) d[i] = n(rng);
    Eigen::Matrix4d twist = Eigen::Matrix4d::Zero();
    twist.topLeftCorner<3, 3>() = skew(d.head<3>());
    twist.topRightCorner<3, 1>() = d.tail<3>();
    const Eigen::Matrix4d want = homogeneous(pose) * twist.exp();
    const Eigen::Matrix4d got = homogeneous(pose.retract(d));
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(pose.retract(d).is_valid());
  }
  const CameraPose p = CameraPose::Identity().retract(Vector6::Zero());
  CHECK(p.rotation.isApprox(Matrix3::Identity()));
  CHECK(p.translation.norm() == 0.0);
}

TEST_CASE("camera center and FromCenter") {
  const Matrix3 r = so3_exp(Vector3(0.1, -0.4, 0.2));
  const Vector3 c(1.0, 2.0, 3.0);
  const CameraPose pose = CameraPose::FromCenter(r, c);
  CHECK((pose.camera_center() - c).norm() < 1e-12);
  CHECK(pose.transform(c).norm() < 1e-12);
}

TEST_CASE("pose errors") {
  const CameraPose a = CameraPose::Identity();
  Vector6 d = Vector6::Zero();
  d[2] = 0.3;
  CHECK(rotation_error(a, a.retract(d)) == doctest::Approx(0.3));
  CHECK(rotation_error(a, a) == doctest::Approx(0.0));
  d.setZero();
  d[2] = 3.0;  // near pi stays accurate
  CHECK(rotation_error(a, a.retract(d)) == doctest::Approx(3.0));
  const CameraPose b = CameraPose::FromCenter(Matrix3::Identity(), Vector3(3, 4, 0));
  CHECK(translation_error(a, b) == doctest::Approx(5.0));
}

TEST_CASE("pose information of one match") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const CameraPose pose = random_pose(rng);
    FeatureMatch m;
    m.world_point = point_in_front(rng, pose);
    const auto info = pose_info_single(m, pose, kModel);
    REQUIRE(info.has_value());
    const auto h = *measurement_jacobian(pose, kModel, m.world_point);
    Matrix6 direct;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) direct(i, j) = h(0, i) * h(0, j) + h(1, i) * h(1, j);
    }
    CHECK((*info - direct).cwiseAbs().maxCoeff() <= 1e-9 * direct.cwiseAbs().maxCoeff());
    CHECK((*info - info->transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix6> eig(*info);
    const auto ev = eig.eigenvalues();
    CHECK(ev.minCoeff() >= -1e-9 * ev.maxCoeff());
    // Rank at most two: the four smallest eigenvalues vanish.
    CHECK(ev(3) <= 1e-9 * ev.maxCoeff());
    m.residual_information *= 4.0;
    CHECK((*pose_info_single(m, pose, kModel) - 4.0 * *info).cwiseAbs().maxCoeff() <=
          1e-9 * info->cwiseAbs().maxCoeff());
  }
}

TEST_CASE("damped logdet equals the eigenvalue sum") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rank : {0, 1, 2, 4, 6, 10}) {
    Eigen::Matrix<double, 6, Eigen::Dynamic> a(6, rank);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = 30.0 * n(rng);
    const Matrix6 m = a * a.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix6> eig(m);
    double want = 0.0;
    for (int i = 0; i < 6; ++i) want += std::log(std::max(eig.eigenvalues()(i), 0.0) + 1e-3);
    CHECK(logdet_damped(m, 1e-3) == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK(logdet_damped(Matrix6::Zero(), 1e-3) == doctest::Approx(6.0 * std::log(1e-3)));
}

TEST_CASE("logdet metric sums over matches") {
  std::mt19937_64 rng(5);
  const CameraPose pose = random_pose(rng);
  std::vector<FeatureMatch> ms(20);
  Matrix6 sum = Matrix6::Zero();
  for (auto& m : ms) {
    m.world_point = point_in_front(rng, pose);
    sum += *pose_info_single(m, pose, kModel);
  }
  FeatureMatch behind;
  behind.world_point = pose.rotation.transpose() * (Vector3(0, 0, -3) - pose.translation);
  ms.push_back(behind);
  CHECK(logdet_metric<double>(ms, pose, kModel, 1e-3) ==
        doctest::Approx(logdet_damped(sum, 1e-3)));
}

TEST_CASE("logdet is monotone and submodular on nested sets") {
  std::mt19937_64 rng(6);
  const CameraPose pose = random_pose(rng);
  std::vector<Matrix6> infos;
  for (int i = 0; i < 40; ++i) {
    FeatureMatch m;
    m.world_point = point_in_front(rng, pose);
    infos.push_back(*pose_info_single(m, pose, kModel));
  }
  auto f = [&](const std::vector<int>& s) {
    Matrix6 sum = Matrix6::Zero();
    for (int i : s) sum += infos[i];
    return logdet_damped(sum, 1e-3);
  };
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> a, b;
    for (int i = 0; i < 39; ++i) {
      const auto u = rng() % 4;
      if (u == 0) a.push_back(i);
      if (u <= 1) b.push_back(i);  // a is a subset of b
    }
    const double fa = f(a), fb = f(b);
    CHECK(fb >= fa - 1e-9);
    auto a2 = a, b2 = b;
    a2.push_back(39);
    b2.push_back(39);
    CHECK(f(a2) - fa >= f(b2) - fb - 1e-9);
  }
}

TEST_CASE("gauss-newton recovers a perturbed pose") {
  std::mt19937_64 rng(7);
  const CameraPose truth = random_pose(rng);
  std::vector<FeatureMatch> ms(50);
  for (auto& m : ms) {
    m.world_point = point_in_front(rng, truth);
    m.measurement = *project(truth, kModel, m.world_point);
  }
  Vector6 d;
  d << 0.05, -0.03, 0.04, 0.05, -0.05, 0.03;
  const auto r = gauss_newton_refine(truth.retract(d), kModel, std::span<const FeatureMatch>(ms));
  CHECK(r.ok());
  CHECK(r.iterations <= 10);
  CHECK(rotation_error(r.pose, truth) < 1e-6);
  CHECK(translation_error(r.pose, truth) < 1e-6);
  CHECK(r.final_cost < r.initial_cost);

  const auto again = gauss_newton_refine(truth, kModel, std::span<const FeatureMatch>(ms));
  CHECK(again.iterations <= 1);
  CHECK(again.final_cost == doctest::Approx(again.initial_cost).epsilon(1e-10));
}

TEST_CASE("gauss-newton degenerate inputs") {
  std::vector<FeatureMatch> line(10);
  for (int i = 0; i < 10; ++i) {
    line[i].world_point = Vector3(0.0, 0.0, 2.0 + i);
    line[i].measurement = Vector2(320.0, 240.0);
  }
  const auto r = gauss_newton_refine(CameraPose::Identity(), kModel,
                                     std::span<const FeatureMatch>(line));
  CHECK(r.status == RefineStatus::kSingular);
  CHECK_FALSE(r.ok());
  const std::vector<FeatureMatch> two(line.begin(), line.begin() + 2);
  CHECK(gauss_newton_refine(CameraPose::Identity(), kModel, std::span<const FeatureMatch>(two))
            .status == RefineStatus::kTooFewMatches);
  CHECK(to_string(RefineStatus::kSingular) == "singular");
}

TEST_CASE("single precision instantiation") {
  const CameraPoseT<float> pose = CameraPose::Identity().cast<float>();
  const PinholeModelT<float> model{500.0f, 500.0f, 320.0f, 240.0f};
  const auto uv = project(pose, model, Vector3T<float>(0.0f, 0.0f, 2.0f));
  REQUIRE(uv.has_value());
  CHECK((*uv)(0) == doctest::Approx(320.0f));
  CHECK(measurement_jacobian(pose, model, Vector3T<float>(0.1f, 0.2f, 2.0f)).has_value());
}
