#include "vsr/clips.hpp"

#include "vsr/errors.hpp"
#include "vsr/graph.hpp"

namespace vsr {

void LandmarkClip::validate() const {
  if (frames.ndim() != 3 || frames.dim(1) != lip_template::kPointCount ||
      frames.dim(2) != 2)
    throw ShapeMismatch("landmark clip must be [T,117,2], got " +
                        frames.shape_str());
  const int t = frames.dim(0);
  if (t < 1) throw EmptyClip("landmark clip has no frames");
  if (static_cast<int>(valid.size()) != t)
    throw ShapeMismatch("validity flags must match frame count");
  for (int i = 0; i < t; ++i) {
    if (valid[static_cast<std::size_t>(i)]) continue;
    for (int n = 0; n < frames.dim(1); ++n)
      for (int c = 0; c < 2; ++c)
        if (frames.at({i, n, c}) != 0.0)
          throw Error("invalid frame " + std::to_string(i) +
                      " must be zero-padded");
  }
}

FrameClip normalize_frames(const Tensor& raw, double mean, double stddev) {
  if (raw.ndim() != 3) throw ShapeMismatch("frames must be [T,H,W]");
  if (stddev <= 0.0) throw Error("frame normalization requires std > 0");
  FrameClip clip;
  clip.mean = mean;
  clip.stddev = stddev;
  clip.frames = raw;
  for (auto& v : clip.frames.data) v = (v - mean) / stddev;
  return clip;
}

}  // namespace vsr
