#include "volcap/frame.hpp"

namespace volcap {

void Frame::validate() const {
  require_same_shape(color, depth, "frame");
  require_same_shape(color, mask, "frame");
  if (camera.intrinsics.width != color.width() || camera.intrinsics.height != color.height()) {
    throw ShapeError("frame: camera size does not match the images");
  }
}

}  // namespace volcap
