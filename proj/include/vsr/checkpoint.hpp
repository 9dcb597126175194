#ifndef VSR_CHECKPOINT_HPP
#define VSR_CHECKPOINT_HPP

#include <string>

#include "vsr/optim.hpp"
#include "vsr/params.hpp"
#include "vsr/rng.hpp"

namespace vsr {

// Versioned binary container: magic, format version, config echo, named
// parameter blobs (name, shape, raw doubles), optimizer state, training
// counters and the rng stream, closed by an FNV-1a checksum over the
// payload. Doubles are stored verbatim, so save -> load -> save is
// byte-identical.
struct CheckpointMeta {
  std::string config_echo;
  int epoch = 0;
  std::int64_t global_step = 0;
  double frame_mean = 0.0;
  double frame_std = 1.0;
  std::array<std::uint64_t, 4> rng_state{};
  bool rng_has_cached = false;
  double rng_cached = 0.0;
};

void save_checkpoint(const std::string& path, const ParamRegistry& params,
                     const AdamW& opt, const CheckpointMeta& meta);

// Loads into the registry's tensors; parameter names and shapes must match
// (VersionMismatch on layout differences, ShapeMismatch on extents,
// CorruptFile on checksum failure). opt may be null to skip optimizer state.
CheckpointMeta load_checkpoint(const std::string& path,
                               const ParamRegistry& params, AdamW* opt);

}  // namespace vsr

#endif  // VSR_CHECKPOINT_HPP
