#pragma once

#include <cstdint>
#include <vector>

#include "journey/geometry.hpp"

namespace journey {

enum class TrajectoryKind { linear, rotational };

// Camera path parameters. The translation/rotation magnitudes are totals over
// the whole path, not per-frame steps.
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::linear;
  int frames = 48;                    // pose count N+1
  double translation_total = 0.0005;  // world units
  double rotation_total = 0.0;        // radians
  double sine_amplitude = 5e-5;       // height perturbation, world units
  int sine_cycles = 1;

  void validate() const;
  bool operator==(const TrajectorySpec&) const = default;
};

inline TrajectorySpec default_linear_spec() { return {}; }

inline TrajectorySpec default_rotational_spec() {
  TrajectorySpec s;
  s.kind = TrajectoryKind::rotational;
  s.rotation_total = 0.45;
  s.translation_total = 0.0001;
  s.sine_amplitude = 0.0;
  return s;
}

struct CameraPath {
  std::vector<CameraPose> poses;
  TrajectorySpec spec;
  bool operator==(const CameraPath&) const = default;
};

// Backward motion along -view axis with a seeded-phase sine height offset on
// the intermediate cameras; the offset is forced to zero at both endpoints.
CameraPath linear_path(const CameraPose& start, const TrajectorySpec& spec,
                       uint64_t seed);

// Yaw swung linearly toward the initial right axis while the camera center
// strafes along that axis.
CameraPath rotational_path(const CameraPose& start, const TrajectorySpec& spec);

CameraPath make_path(const CameraPose& start, const TrajectorySpec& spec,
                     uint64_t seed);

// Angle between the start and given pose view axes; used to check yaw ramps.
double view_angle(const CameraPose& a, const CameraPose& b);

}  // namespace journey
