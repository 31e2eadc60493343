#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "journey/tensor.hpp"

namespace journey {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;
  bool operator==(const Vec3&) const = default;
};

struct Mat3 {
  // row-major
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  // rotation about the +y axis; applied to (0,0,1) gives (sin t, 0, cos t)
  static Mat3 rotation_y(double angle);

  double at(int r, int c) const { return m[r * 3 + c]; }
  double& at(int r, int c) { return m[r * 3 + c]; }
  Vec3 row(int r) const { return {m[r * 3], m[r * 3 + 1], m[r * 3 + 2]}; }
  Vec3 operator*(const Vec3& v) const;
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
  double det() const;
  bool operator==(const Mat3&) const = default;
};

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;  // focal lengths, pixels
  double cx = 0.0, cy = 0.0;  // principal point, pixels
  int width = 0, height = 0;

  void validate() const;
  bool operator==(const CameraIntrinsics&) const = default;
};

// Centered principal point, focal length = max dimension.
CameraIntrinsics default_intrinsics(int width, int height);

// World-to-camera transform: p_cam = R p_world + t. The camera looks along
// +z of its own frame, x right, y down.
struct CameraPose {
  Mat3 rotation;
  Vec3 translation;

  Vec3 to_camera(const Vec3& p_world) const {
    return rotation * p_world + translation;
  }
  Vec3 to_world(const Vec3& p_cam) const {
    return rotation.transposed() * (p_cam - translation);
  }
  Vec3 center() const { return rotation.transposed() * (translation * -1.0); }
  Vec3 view_axis_world() const { return rotation.row(2); }
  Vec3 right_axis_world() const { return rotation.row(0); }
  Vec3 up_axis_world() const { return rotation.row(1) * -1.0; }

  // RtR = I and det = 1, both within 1e-9.
  bool is_valid() const;
  void validate() const;
  bool operator==(const CameraPose&) const = default;
};

// Camera-frame z depth per pixel, positive and finite.
struct DepthMap {
  int height = 0, width = 0;
  std::vector<double> data;

  DepthMap() = default;
  DepthMap(int h, int w, double fill = 1.0)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}
  double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  void validate() const;
};

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<double> colors;  // flattened, `channels` values per point
  int channels = 0;

  size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
};

// Binary visibility mask, 1 = covered.
struct Mask {
  int height = 0, width = 0;
  std::vector<double> data;

  Mask() = default;
  Mask(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}
  double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  size_t count() const;
};

struct RenderOutput {
  Image image;     // zero outside the mask
  Mask mask;
  DepthMap depth;  // camera-frame z of the winning point, 0 where uncovered
};

struct RenderOptions {
  // 0 = nearest-pixel splat; > 0 covers every pixel whose center lies within
  // this radius of the projected point.
  double splat_radius = 0.0;
  double z_near = 1e-6;
};

// Lift every pixel through the pinhole model: depth * K^-1 (u,v,1), then to
// world coordinates. One point per pixel, colors copied.
PointCloud unproject(const Image& image, const DepthMap& depth,
                     const CameraPose& pose, const CameraIntrinsics& K);

// Z-buffered point splatting. Nearer points win; depths equal within 1e-9
// keep the earlier point in cloud order, so renders are deterministic.
RenderOutput render(const PointCloud& cloud, const CameraPose& pose,
                    const CameraIntrinsics& K, const RenderOptions& opts = {});

// Reference single-loop renderer kept for testing the parallel path.
RenderOutput render_serial(const PointCloud& cloud, const CameraPose& pose,
                           const CameraIntrinsics& K,
                           const RenderOptions& opts = {});

// Concatenate a then b, collapsing points that fall into the same voxel of
// edge `voxel` (first point wins).
PointCloud merge(const PointCloud& a, const PointCloud& b,
                 double voxel = 1e-4);

}  // namespace journey
