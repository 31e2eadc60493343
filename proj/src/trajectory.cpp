#include "journey/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "journey/random.hpp"

namespace journey {

void TrajectorySpec::validate() const {
  if (frames < 2) throw std::invalid_argument("trajectory: frames must be >= 2");
  if (translation_total < 0.0)
    throw std::invalid_argument("trajectory: negative translation");
  if (std::fabs(rotation_total) > std::numbers::pi)
    throw std::invalid_argument("trajectory: |rotation| exceeds pi");
  if (sine_cycles < 0)
    throw std::invalid_argument("trajectory: negative sine cycle count");
}

CameraPath linear_path(const CameraPose& start, const TrajectorySpec& spec,
                       uint64_t seed) {
  if (spec.kind != TrajectoryKind::linear)
    throw std::invalid_argument("linear_path: spec kind is not linear");
  spec.validate();
  start.validate();

  RandomSource rng(seed);
  const double phase = rng.uniform() * 2.0 * std::numbers::pi;

  const Vec3 view = start.view_axis_world();
  const Vec3 up = start.up_axis_world();
  const Vec3 c0 = start.center();
  const int n = spec.frames - 1;

  CameraPath path;
  path.spec = spec;
  path.poses.reserve(spec.frames);
  path.poses.push_back(start);
  for (int i = 1; i <= n; ++i) {
    const double back = spec.translation_total * i / n;
    double height = 0.0;
    if (i != n)
      height = spec.sine_amplitude *
               std::sin(2.0 * std::numbers::pi * spec.sine_cycles * i / n +
                        phase);
    const Vec3 center = c0 - view * back + up * height;
    CameraPose pose;
    pose.rotation = start.rotation;
    pose.translation = (pose.rotation * center) * -1.0;
    path.poses.push_back(pose);
  }
  return path;
}

CameraPath rotational_path(const CameraPose& start,
                           const TrajectorySpec& spec) {
  if (spec.kind != TrajectoryKind::rotational)
    throw std::invalid_argument("rotational_path: spec kind is not rotational");
  spec.validate();
  start.validate();

  const Vec3 right = start.right_axis_world();
  const Vec3 c0 = start.center();
  const int n = spec.frames - 1;

  CameraPath path;
  path.spec = spec;
  path.poses.reserve(spec.frames);
  path.poses.push_back(start);
  for (int i = 1; i <= n; ++i) {
    const double yaw = spec.rotation_total * i / n;
    const double strafe = spec.translation_total * i / n;
    CameraPose pose;
    // Positive yaw swings the view direction toward the initial right axis.
    pose.rotation = Mat3::rotation_y(-yaw) * start.rotation;
    const Vec3 center = c0 + right * strafe;
    pose.translation = (pose.rotation * center) * -1.0;
    path.poses.push_back(pose);
  }
  return path;
}

CameraPath make_path(const CameraPose& start, const TrajectorySpec& spec,
                     uint64_t seed) {
  return spec.kind == TrajectoryKind::linear ? linear_path(start, spec, seed)
                                             : rotational_path(start, spec);
}

double view_angle(const CameraPose& a, const CameraPose& b) {
  const double c = a.view_axis_world().dot(b.view_axis_world());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace journey
