#ifndef VSR_TRAINER_HPP
#define VSR_TRAINER_HPP

#include <functional>
#include <string>
#include <vector>

#include "vsr/losses.hpp"
#include "vsr/manifest.hpp"
#include "vsr/model.hpp"
#include "vsr/optim.hpp"

namespace vsr {

struct TrainConfig {
  int epochs = 50;
  int warmup_epochs = 5;
  double lr_init = 0.001;
  double lr_min = 1e-6;  // lr_init / 1000
  int frame_cap = 1800;  // max summed frames per batch
  HybridLossConfig loss;
  AdamWConfig adamw;
  std::uint64_t seed = 1;
  std::string out_dir;  // checkpoints + metrics log; empty disables files

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double hybrid_loss = 0.0;
  double ctc_loss = 0.0;
  double ce_loss = 0.0;
  double per = 0.0;
};

std::string format_log_line(const EpochLog& log);

// Greedy packing by descending length: sort, then fill batches left to
// right, closing a batch when the next utterance would exceed the cap.
// Returns utterance indices per batch; every index appears exactly once.
// Throws UtteranceTooLong when a single utterance exceeds the cap.
std::vector<std::vector<int>> make_batches(const std::vector<int>& lengths,
                                           int frame_cap);

struct TrainState {
  int epoch = 0;  // completed epochs
  std::int64_t global_step = 0;
  double frame_mean = 0.0;
  double frame_std = 1.0;
  Rng rng;  // batch-order stream
};

class Trainer {
 public:
  // config_echo is stored verbatim in checkpoints (CLI passes its config
  // file; tests may pass "")
  Trainer(Stage1Model& model, const TrainConfig& cfg,
          std::vector<Utterance> train_set, std::vector<Utterance> heldout,
          std::string config_echo = "");

  // train from the current state to cfg.epochs; per-epoch logs returned and,
  // when out_dir is set, appended to metrics.jsonl with a checkpoint per
  // epoch. The optional callback sees each epoch log (e.g. for early stop:
  // return false to halt).
  std::vector<EpochLog> run(
      const std::function<bool(const EpochLog&)>& on_epoch = nullptr);

  void resume_from(const std::string& checkpoint_path);
  void save(const std::string& path) const;

  // corpus-level greedy phoneme error rate on the held-out set
  double evaluate_per() const;

  const TrainState& state() const { return state_; }
  double frame_mean() const { return state_.frame_mean; }
  double frame_std() const { return state_.frame_std; }

 private:
  EpochLog train_one_epoch(const std::vector<std::vector<int>>& batches,
                           std::int64_t total_steps,
                           std::int64_t warmup_steps);
  FrameClip clip_of(const Utterance& utt) const;

  Stage1Model& model_;
  TrainConfig cfg_;
  std::vector<Utterance> train_;
  std::vector<Utterance> heldout_;
  std::string config_echo_;
  AdamW opt_;
  TrainState state_;
};

}  // namespace vsr

#endif  // VSR_TRAINER_HPP
