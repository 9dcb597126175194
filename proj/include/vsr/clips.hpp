#ifndef VSR_CLIPS_HPP
#define VSR_CLIPS_HPP

#include <vector>

#include "vsr/tensor.hpp"

namespace vsr {

// Per-frame 117-point lip landmarks in crop-normalized [0,1] coordinates.
// Frames where detection failed carry the zero-padding contract: the frame is
// exactly all-zero and flagged invalid. Zeros flow through the encoder;
// validity flags are diagnostics only.
struct LandmarkClip {
  Tensor frames;            // [T,117,2]
  std::vector<bool> valid;  // size T

  int length() const { return frames.ndim() == 3 ? frames.dim(0) : 0; }
  // checks the invariants; throws on violation
  void validate() const;
};

// Grayscale mouth-crop frames normalized as (x - mean) / std with the stats
// recorded alongside.
struct FrameClip {
  Tensor frames;  // [T,H,W]
  double mean = 0.0;
  double stddev = 1.0;

  int length() const { return frames.ndim() == 3 ? frames.dim(0) : 0; }
};

// applies (x - mean) / std; std must be positive
FrameClip normalize_frames(const Tensor& raw, double mean, double stddev);

}  // namespace vsr

#endif  // VSR_CLIPS_HPP
