#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "journey/geometry.hpp"
#include "journey/random.hpp"
#include "journey/synth.hpp"

using namespace journey;

namespace {

Image checker_image(int h, int w) {
  return make_pattern_image(TextureKind::checker, h, w, 3, 1);
}

CameraPose pose_with_center(const Mat3& rotation, const Vec3& center) {
  CameraPose p;
  p.rotation = rotation;
  p.translation = (rotation * center) * -1.0;
  return p;
}

}  // namespace

TEST_CASE("unproject maps the principal point and unit tangent correctly") {
  CameraIntrinsics K;
  K.fx = K.fy = 8.0;
  K.cx = 4.0;
  K.cy = 3.0;
  K.width = 16;
  K.height = 8;
  Image img(8, 16, 3, 0.5);
  DepthMap depth(8, 16, 2.0);
  const PointCloud cloud = unproject(img, depth, CameraPose{}, K);

  const size_t center_idx = 3 * 16 + 4;  // pixel (u=cx, v=cy)
  CHECK(cloud.positions[center_idx].x == doctest::Approx(0.0));
  CHECK(cloud.positions[center_idx].y == doctest::Approx(0.0));
  CHECK(cloud.positions[center_idx].z == doctest::Approx(2.0));

  DepthMap unit(8, 16, 1.0);
  const PointCloud c2 = unproject(img, unit, CameraPose{}, K);
  const size_t tangent_idx = 3 * 16 + 12;  // pixel (cx + fx, cy)
  CHECK(c2.positions[tangent_idx].x == doctest::Approx(1.0));
  CHECK(c2.positions[tangent_idx].y == doctest::Approx(0.0));
  CHECK(c2.positions[tangent_idx].z == doctest::Approx(1.0));
}

TEST_CASE("unproject rejects nonpositive depth") {
  Image img(2, 2, 1, 0.0);
  DepthMap depth(2, 2, 1.0);
  depth.at(1, 1) = 0.0;
  CHECK_THROWS_AS(unproject(img, depth, CameraPose{}, default_intrinsics(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("render/unproject round trip is exact at the same pose") {
  const Image img = checker_image(4, 4);
  DepthMap depth(4, 4, 2.0);
  const CameraIntrinsics K = default_intrinsics(4, 4);
  const PointCloud cloud = unproject(img, depth, CameraPose{}, K);
  const RenderOutput out = render(cloud, CameraPose{}, K);
  CHECK(out.mask.count() == 16);
  CHECK(out.image == img);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      CHECK(out.depth.at(y, x) == doctest::Approx(2.0));
}

TEST_CASE("render culls, z-tests and splats deterministically") {
  const CameraIntrinsics K = default_intrinsics(9, 9);

  PointCloud one;
  one.channels = 3;
  one.positions = {{0.0, 0.0, 1.0}};
  one.colors = {1.0, 0.0, 0.0};
  const RenderOutput r1 = render(one, CameraPose{}, K);
  CHECK(r1.mask.count() == 1);
  CHECK(r1.mask.at(4, 4) == 1.0);
  CHECK(r1.image.at(4, 4, 0) == 1.0);

  PointCloud behind;
  behind.channels = 3;
  behind.positions = {{0.0, 0.0, -1.0}};
  behind.colors = {1.0, 0.0, 0.0};
  CHECK(render(behind, CameraPose{}, K).mask.count() == 0);

  // red at z=1 in front of blue at z=2 on the same ray
  PointCloud ray;
  ray.channels = 3;
  ray.positions = {{0.0, 0.0, 2.0}, {0.0, 0.0, 1.0}};
  ray.colors = {0.0, 0.0, 1.0, 1.0, 0.0, 0.0};
  const RenderOutput r2 = render(ray, CameraPose{}, K);
  CHECK(r2.image.at(4, 4, 0) == 1.0);
  CHECK(r2.image.at(4, 4, 2) == 0.0);

  // depths equal within 1e-9: the earlier point keeps the pixel
  PointCloud tie;
  tie.channels = 1;
  tie.positions = {{0.0, 0.0, 1.0}, {0.0, 0.0, 1.0 - 1e-12}};
  tie.colors = {0.25, 0.75};
  CHECK(render(tie, CameraPose{}, K).image.at(4, 4, 0) == 0.25);
}

TEST_CASE("parallel render matches the serial reference bit for bit") {
  RandomSource rng(404);
  for (double radius : {0.0, 1.6}) {
    PointCloud cloud;
    cloud.channels = 3;
    for (int i = 0; i < 20000; ++i) {
      cloud.positions.push_back(
          {rng.normal() * 0.5, rng.normal() * 0.5, 1.0 + rng.uniform() * 3.0});
      for (int c = 0; c < 3; ++c) cloud.colors.push_back(rng.uniform());
    }
    const CameraIntrinsics K = default_intrinsics(32, 24);
    RenderOptions opts;
    opts.splat_radius = radius;
    const RenderOutput a = render(cloud, CameraPose{}, K, opts);
    const RenderOutput b = render_serial(cloud, CameraPose{}, K, opts);
    CHECK(a.image == b.image);
    CHECK(a.mask.data == b.mask.data);
    CHECK(a.depth.data == b.depth.data);
  }
}

TEST_CASE("planar scaling law: backing up rescales the imaged plane") {
  // Fronto-parallel plane at depth d; camera moves back by delta; the plane's
  // imaged width scales by d/(d+delta). Oracle: the analytic pinhole
  // projection of the plane edges.
  const int W = 64, H = 8;
  const double d = 2.0, delta = 0.5;
  const CameraIntrinsics K = default_intrinsics(W, H);
  const Image img = checker_image(H, W);
  DepthMap depth(H, W, d);
  const PointCloud cloud = unproject(img, depth, CameraPose{}, K);

  CameraPose back = pose_with_center(Mat3::identity(), {0.0, 0.0, -delta});
  const RenderOutput out = render(cloud, back, K);

  int min_x = W, max_x = -1;
  const int row = H / 2;
  for (int x = 0; x < W; ++x)
    if (out.mask.at(row, x) != 0.0) {
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
    }
  REQUIRE(max_x >= min_x);
  const double measured = max_x - min_x;
  const double expected = (W - 1) * d / (d + delta);
  CHECK(std::fabs(measured - expected) <= 1.0);
}

TEST_CASE("rendering is equivariant under a world rotation") {
  RandomSource rng(777);
  PointCloud cloud;
  cloud.channels = 3;
  for (int i = 0; i < 500; ++i) {
    cloud.positions.push_back(
        {rng.normal() * 0.3, rng.normal() * 0.3, 1.5 + rng.uniform()});
    for (int c = 0; c < 3; ++c) cloud.colors.push_back(rng.uniform());
  }
  const CameraIntrinsics K = default_intrinsics(16, 16);
  const CameraPose pose =
      pose_with_center(Mat3::rotation_y(0.3), {0.1, 0.0, -0.2});

  const Mat3 q = Mat3::rotation_y(0.9);
  PointCloud rotated = cloud;
  for (Vec3& p : rotated.positions) p = q * p;
  CameraPose rotated_pose;
  rotated_pose.rotation = pose.rotation * q.transposed();
  rotated_pose.translation = pose.translation;

  const RenderOutput a = render(cloud, pose, K);
  const RenderOutput b = render(rotated, rotated_pose, K);
  CHECK(a.image == b.image);
  CHECK(a.mask.data == b.mask.data);
}

TEST_CASE("merge dedups by voxel and keeps disjoint clouds") {
  RandomSource rng(12);
  PointCloud p;
  p.channels = 1;
  for (int i = 0; i < 10; ++i) {
    p.positions.push_back({rng.uniform(), rng.uniform(), 1.0 + rng.uniform()});
    p.colors.push_back(rng.uniform());
  }
  PointCloud empty;
  empty.channels = 1;

  CHECK(merge(p, empty).size() == p.size());
  CHECK(merge(p, p).size() == p.size());

  PointCloud far;
  far.channels = 1;
  for (int i = 0; i < 20; ++i) {
    far.positions.push_back(
        {100.0 + rng.uniform(), rng.uniform(), 1.0 + rng.uniform()});
    far.colors.push_back(rng.uniform());
  }
  CHECK(merge(p, far).size() == 30);

  PointCloud rgb;
  rgb.channels = 3;
  rgb.positions = {{0, 0, 0}};
  rgb.colors = {0, 0, 0};
  CHECK_THROWS_AS(merge(p, rgb), std::invalid_argument);
}

TEST_CASE("camera pose validation") {
  CameraPose p;
  CHECK(p.is_valid());
  p.rotation.at(0, 0) = 2.0;
  CHECK_FALSE(p.is_valid());
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  // det = -1 (reflection) is rejected even though R^T R = I
  CameraPose mirror;
  mirror.rotation.m = {1, 0, 0, 0, 1, 0, 0, 0, -1};
  CHECK_FALSE(mirror.is_valid());
}
