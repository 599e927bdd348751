// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace editduet {

enum class ShotType { ExtremeCloseUp, CloseUp, Medium, Full, Long };

enum class CameraMotion {
  Static,
  ZoomIn,
  VerticalStaticMoving,
  Aerial,
  TravellingInOut,
  Handheld,
  Panoramic,
  PanoramicLateral,
};

inline constexpr std::array<std::string_view, 5> kShotTypeLabels = {
    "extreme close-up", "close-up", "medium", "full", "long"};

inline constexpr std::array<std::string_view, 8> kCameraMotionLabels = {
    "static",   "zoom in",  "vertical static/moving", "aerial", "travelling in/out",
    "handheld", "panoramic", "panoramic lateral"};

std::string_view to_string(ShotType shot);
std::string_view to_string(CameraMotion motion);

// Exact, case-sensitive match against the closed vocabularies.
std::optional<ShotType> parse_shot_type(std::string_view label);
std::optional<CameraMotion> parse_camera_motion(std::string_view label);

}  // namespace editduet
