#include "journey/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace journey {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

Mat3 Mat3::rotation_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r.m = {c, 0, s, 0, 1, 0, -s, 0, c};
  return r;
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
          m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += at(i, k) * o.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.at(i, j) = at(j, i);
  return r;
}

double Mat3::det() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) -
         m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (width < 1 || height < 1)
    throw std::invalid_argument("intrinsics: empty image plane");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw std::invalid_argument("intrinsics: principal point outside image");
}

CameraIntrinsics default_intrinsics(int width, int height) {
  CameraIntrinsics k;
  k.width = width;
  k.height = height;
  k.fx = k.fy = static_cast<double>(std::max(width, height));
  k.cx = (width - 1) / 2.0;
  k.cy = (height - 1) / 2.0;
  return k;
}

bool CameraPose::is_valid() const {
  const Mat3 rtr = rotation.transposed() * rotation;
  const Mat3 eye = Mat3::identity();
  for (int i = 0; i < 9; ++i)
    if (std::fabs(rtr.m[i] - eye.m[i]) > 1e-9) return false;
  if (std::fabs(rotation.det() - 1.0) > 1e-9) return false;
  for (double v : {translation.x, translation.y, translation.z})
    if (!std::isfinite(v)) return false;
  return true;
}

void CameraPose::validate() const {
  if (!is_valid())
    throw std::invalid_argument("camera pose: rotation is not orthonormal");
}

void DepthMap::validate() const {
  for (double d : data)
    if (!(d > 0.0) || !std::isfinite(d))
      throw std::invalid_argument("depth map: nonpositive or non-finite entry");
}

size_t Mask::count() const {
  size_t n = 0;
  for (double v : data) n += v != 0.0;
  return n;
}

PointCloud unproject(const Image& image, const DepthMap& depth,
                     const CameraPose& pose, const CameraIntrinsics& K) {
  if (image.height != depth.height || image.width != depth.width)
    throw std::invalid_argument("unproject: image and depth sizes differ");
  K.validate();
  pose.validate();
  depth.validate();

  PointCloud cloud;
  cloud.channels = image.channels;
  const size_t n = static_cast<size_t>(image.height) * image.width;
  cloud.positions.resize(n);
  cloud.colors.resize(n * image.channels);

#pragma omp parallel for schedule(static)
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      const size_t i = static_cast<size_t>(v) * image.width + u;
      const double d = depth.at(v, u);
      const Vec3 p_cam{d * (u - K.cx) / K.fx, d * (v - K.cy) / K.fy, d};
      cloud.positions[i] = pose.to_world(p_cam);
      for (int c = 0; c < image.channels; ++c)
        cloud.colors[i * image.channels + c] = image.at(v, u, c);
    }
  }
  return cloud;
}

namespace {

struct Projected {
  double u = 0.0, v = 0.0, z = 0.0;
  bool valid = false;
};

Projected project_point(const Vec3& p, const CameraPose& pose,
                        const CameraIntrinsics& K, double z_near) {
  const Vec3 cam = pose.to_camera(p);
  Projected out;
  if (!(cam.z > z_near)) return out;
  out.u = K.fx * cam.x / cam.z + K.cx;
  out.v = K.fy * cam.y / cam.z + K.cy;
  out.z = cam.z;
  out.valid = true;
  return out;
}

// One z-buffer cell: nearest depth so far plus the point that owns it.
struct ZCell {
  double depth = std::numeric_limits<double>::infinity();
  int64_t owner = -1;
};

// Splat one projected point into the z-buffer, following the tie-break rule:
// a later point only wins when it is nearer by more than 1e-9.
template <typename Visit>
void splat_pixels(const Projected& p, int width, int height, double radius,
                  Visit&& visit) {
  if (radius <= 0.0) {
    const int px = static_cast<int>(std::lround(p.u));
    const int py = static_cast<int>(std::lround(p.v));
    if (px >= 0 && px < width && py >= 0 && py < height) visit(px, py);
    return;
  }
  const int x0 = std::max(0, static_cast<int>(std::ceil(p.u - radius)));
  const int x1 = std::min(width - 1, static_cast<int>(std::floor(p.u + radius)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(p.v - radius)));
  const int y1 = std::min(height - 1, static_cast<int>(std::floor(p.v + radius)));
  const double r2 = radius * radius;
  for (int py = y0; py <= y1; ++py)
    for (int px = x0; px <= x1; ++px) {
      const double dx = px - p.u, dy = py - p.v;
      if (dx * dx + dy * dy <= r2) visit(px, py);
    }
}

void zfold(const std::vector<Projected>& proj, int width, int height,
           double radius, std::vector<ZCell>& zbuf) {
  for (int64_t i = 0; i < static_cast<int64_t>(proj.size()); ++i) {
    const Projected& p = proj[i];
    if (!p.valid) continue;
    splat_pixels(p, width, height, radius, [&](int px, int py) {
      ZCell& cell = zbuf[static_cast<size_t>(py) * width + px];
      if (p.z < cell.depth - 1e-9) cell = {p.z, i};
    });
  }
}

RenderOutput compose(const PointCloud& cloud, const std::vector<ZCell>& zbuf,
                     const CameraIntrinsics& K) {
  RenderOutput out;
  out.image = Image(K.height, K.width, cloud.channels);
  out.mask = Mask(K.height, K.width);
  out.depth = DepthMap(K.height, K.width, 0.0);
  for (int y = 0; y < K.height; ++y)
    for (int x = 0; x < K.width; ++x) {
      const ZCell& cell = zbuf[static_cast<size_t>(y) * K.width + x];
      if (cell.owner < 0) continue;
      out.mask.at(y, x) = 1.0;
      out.depth.at(y, x) = cell.depth;
      for (int c = 0; c < cloud.channels; ++c)
        out.image.at(y, x, c) =
            cloud.colors[static_cast<size_t>(cell.owner) * cloud.channels + c];
    }
  return out;
}

}  // namespace

RenderOutput render(const PointCloud& cloud, const CameraPose& pose,
                    const CameraIntrinsics& K, const RenderOptions& opts) {
  K.validate();
  pose.validate();
  // Projection is the data-parallel part; the z-fold stays in cloud order so
  // the tie-break rule gives the same image as render_serial, bit for bit.
  std::vector<Projected> proj(cloud.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < static_cast<int64_t>(cloud.size()); ++i)
    proj[i] = project_point(cloud.positions[i], pose, K, opts.z_near);

  std::vector<ZCell> zbuf(static_cast<size_t>(K.width) * K.height);
  zfold(proj, K.width, K.height, opts.splat_radius, zbuf);
  return compose(cloud, zbuf, K);
}

RenderOutput render_serial(const PointCloud& cloud, const CameraPose& pose,
                           const CameraIntrinsics& K,
                           const RenderOptions& opts) {
  K.validate();
  pose.validate();
  std::vector<ZCell> zbuf(static_cast<size_t>(K.width) * K.height);
  for (int64_t i = 0; i < static_cast<int64_t>(cloud.size()); ++i) {
    const Projected p =
        project_point(cloud.positions[i], pose, K, opts.z_near);
    if (!p.valid) continue;
    splat_pixels(p, K.width, K.height, opts.splat_radius, [&](int px, int py) {
      ZCell& cell = zbuf[static_cast<size_t>(py) * K.width + px];
      if (p.z < cell.depth - 1e-9) cell = {p.z, i};
    });
  }
  return compose(cloud, zbuf, K);
}

namespace {

struct VoxelKey {
  int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelHash {
  size_t operator()(const VoxelKey& k) const {
    uint64_t h = 1469598103934665603ULL;
    for (uint64_t v : {static_cast<uint64_t>(k.x), static_cast<uint64_t>(k.y),
                       static_cast<uint64_t>(k.z)}) {
      h ^= v;
      h *= 1099511628211ULL;
    }
    return static_cast<size_t>(h);
  }
};

}  // namespace

PointCloud merge(const PointCloud& a, const PointCloud& b, double voxel) {
  if (!a.empty() && !b.empty() && a.channels != b.channels)
    throw std::invalid_argument("merge: color channel counts differ");
  PointCloud out;
  out.channels = a.empty() ? b.channels : a.channels;
  out.positions.reserve(a.size() + b.size());
  out.colors.reserve(a.colors.size() + b.colors.size());

  std::unordered_set<VoxelKey, VoxelHash> occupied;
  occupied.reserve(a.size() + b.size());
  auto add_all = [&](const PointCloud& src) {
    for (size_t i = 0; i < src.size(); ++i) {
      const Vec3& p = src.positions[i];
      const VoxelKey key{static_cast<int64_t>(std::floor(p.x / voxel)),
                         static_cast<int64_t>(std::floor(p.y / voxel)),
                         static_cast<int64_t>(std::floor(p.z / voxel))};
      if (!occupied.insert(key).second) continue;
      out.positions.push_back(p);
      for (int c = 0; c < out.channels; ++c)
        out.colors.push_back(src.colors[i * out.channels + c]);
    }
  };
  add_all(a);
  add_all(b);
  return out;
}

}  // namespace journey
