#pragma once

#include "volcap/geometry.hpp"
#include "volcap/pose.hpp"

namespace volcap {

// One RGBD capture: registered color, depth (meters), foreground mask,
// camera and detected keypoints.
struct Frame {
  RgbImage color;
  DepthMap depth;
  ScalarImage mask;  // 1 foreground, 0 background
  Camera camera;
  KeypointSet keypoints;

  int width() const noexcept { return color.width(); }
  int height() const noexcept { return color.height(); }
  // Throws ShapeError if the rasters or intrinsics disagree on size.
  void validate() const;
};

}  // namespace volcap
