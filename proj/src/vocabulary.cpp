// SPDX-License-Identifier: Apache-2.0
#include "editduet/vocabulary.hpp"

#include <cstddef>

namespace editduet {

std::string_view to_string(ShotType shot) {
  return kShotTypeLabels[static_cast<std::size_t>(shot)];
}

std::string_view to_string(CameraMotion motion) {
  return kCameraMotionLabels[static_cast<std::size_t>(motion)];
}

std::optional<ShotType> parse_shot_type(std::string_view label) {
  for (std::size_t i = 0; i < kShotTypeLabels.size(); ++i) {
    if (kShotTypeLabels[i] == label) return static_cast<ShotType>(i);
  }
  return std::nullopt;
}

std::optional<CameraMotion> parse_camera_motion(std::string_view label) {
  for (std::size_t i = 0; i < kCameraMotionLabels.size(); ++i) {
    if (kCameraMotionLabels[i] == label) return static_cast<CameraMotion>(i);
  }
  return std::nullopt;
}

}  // namespace editduet
