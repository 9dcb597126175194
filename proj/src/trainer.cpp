#include "vsr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "vsr/checkpoint.hpp"
#include "vsr/ctc_decode.hpp"
#include "vsr/metrics.hpp"

namespace fs = std::filesystem;

namespace vsr {

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("train: epochs must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs >= epochs)
    throw InvalidSchedule("train: warmup must be shorter than the run");
  if (lr_init <= 0.0) throw Error("train: lr_init must be positive");
  if (frame_cap < 1) throw Error("train: frame cap must be >= 1");
  loss.validate();
}

std::string format_log_line(const EpochLog& log) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "{\"epoch\": %d, \"hybrid_loss\": %.17g, \"ctc_loss\": %.17g, "
                "\"ce_loss\": %.17g, \"per\": %.17g}",
                log.epoch, log.hybrid_loss, log.ctc_loss, log.ce_loss,
                log.per);
  return buf;
}

std::vector<std::vector<int>> make_batches(const std::vector<int>& lengths,
                                           int frame_cap) {
  std::vector<int> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&lengths](int a, int b) {
    return lengths[static_cast<std::size_t>(a)] >
           lengths[static_cast<std::size_t>(b)];
  });
  std::vector<std::vector<int>> batches;
  std::vector<int> current;
  int used = 0;
  for (int idx : order) {
    const int len = lengths[static_cast<std::size_t>(idx)];
    if (len > frame_cap)
      throw UtteranceTooLong("batching: utterance of " + std::to_string(len) +
                             " frames exceeds the cap of " +
                             std::to_string(frame_cap));
    if (used + len > frame_cap && !current.empty()) {
      batches.push_back(std::move(current));
      current.clear();
      used = 0;
    }
    current.push_back(idx);
    used += len;
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

Trainer::Trainer(Stage1Model& model, const TrainConfig& cfg,
                 std::vector<Utterance> train_set,
                 std::vector<Utterance> heldout, std::string config_echo)
    : model_(model),
      cfg_(cfg),
      train_(std::move(train_set)),
      heldout_(std::move(heldout)),
      config_echo_(std::move(config_echo)),
      opt_(model.params(), cfg.adamw) {
  cfg_.validate();
  if (train_.empty()) throw EmptyCorpus("train: no training utterances");
  state_.rng.reseed(cfg_.seed);

  // training-set normalization stats over raw frame intensities
  double sum = 0.0, sq = 0.0;
  std::int64_t count = 0;
  for (const auto& utt : train_) {
    for (double v : utt.frames.data) {
      sum += v;
      sq += v * v;
    }
    count += utt.frames.size();
  }
  state_.frame_mean = sum / static_cast<double>(count);
  const double var =
      sq / static_cast<double>(count) - state_.frame_mean * state_.frame_mean;
  state_.frame_std = std::sqrt(std::max(var, 1e-12));
}

FrameClip Trainer::clip_of(const Utterance& utt) const {
  return normalize_frames(utt.frames, state_.frame_mean, state_.frame_std);
}

double Trainer::evaluate_per() const {
  long long dist = 0, total = 0;
  for (const auto& utt : heldout_) {
    Tape t;
    Var fused = model_.encode(t, clip_of(utt), utt.landmarks);
    const Tensor& lp = t.val(model_.ctc_project(t, fused));
    const std::vector<int> hyp = ctc_greedy(lp);
    const EditStats stats = edit_align(utt.phonemes, hyp);
    dist += stats.distance();
    total += stats.ref_len;
  }
  return total == 0 ? 0.0 : static_cast<double>(dist) / static_cast<double>(total);
}

EpochLog Trainer::train_one_epoch(const std::vector<std::vector<int>>& batches,
                                  std::int64_t total_steps,
                                  std::int64_t warmup_steps) {
  std::vector<int> batch_order(batches.size());
  std::iota(batch_order.begin(), batch_order.end(), 0);
  state_.rng.shuffle(batch_order);

  double hybrid_sum = 0.0, ctc_sum = 0.0, ce_sum = 0.0;
  std::int64_t seen = 0;
  for (int b : batch_order) {
    const auto& batch = batches[static_cast<std::size_t>(b)];
    model_.params().zero_grads();
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (int idx : batch) {
      const Utterance& utt = train_[static_cast<std::size_t>(idx)];
      Tape t;
      auto out = model_.forward(t, clip_of(utt), utt.landmarks, utt.phonemes);
      Var ce = cross_entropy(t, out.ce_logits,
                             Stage1Model::decoder_targets(utt.phonemes),
                             cfg_.loss.label_smoothing);
      Var ctc = ctc_training_loss(t, out.ctc_logprobs, utt.phonemes);
      Var loss = hybrid_loss(t, ce, ctc, cfg_.loss);
      t.backward(t.scale(loss, inv));
      hybrid_sum += t.scalar(loss);
      ctc_sum += t.scalar(ctc);
      ce_sum += t.scalar(ce);
      ++seen;
    }
    const double lr = cosine_warmup_lr(state_.global_step + 1, total_steps,
                                       warmup_steps, cfg_.lr_init, cfg_.lr_min);
    opt_.step(lr);
    ++state_.global_step;
  }

  EpochLog log;
  log.epoch = state_.epoch + 1;
  log.hybrid_loss = hybrid_sum / static_cast<double>(seen);
  log.ctc_loss = ctc_sum / static_cast<double>(seen);
  log.ce_loss = ce_sum / static_cast<double>(seen);
  log.per = evaluate_per();
  return log;
}

std::vector<EpochLog> Trainer::run(
    const std::function<bool(const EpochLog&)>& on_epoch) {
  std::vector<int> lengths;
  lengths.reserve(train_.size());
  for (const auto& utt : train_) lengths.push_back(utt.frames.dim(0));
  const auto batches = make_batches(lengths, cfg_.frame_cap);
  const std::int64_t steps_per_epoch = static_cast<std::int64_t>(batches.size());
  const std::int64_t total_steps = steps_per_epoch * cfg_.epochs;
  const std::int64_t warmup_steps = steps_per_epoch * cfg_.warmup_epochs;

  std::ofstream log_file;
  if (!cfg_.out_dir.empty()) {
    fs::create_directories(cfg_.out_dir);
    log_file.open(fs::path(cfg_.out_dir) / "metrics.jsonl", std::ios::app);
  }

  std::vector<EpochLog> logs;
  while (state_.epoch < cfg_.epochs) {
    EpochLog log = train_one_epoch(batches, total_steps, warmup_steps);
    ++state_.epoch;
    logs.push_back(log);
    if (log_file.is_open()) log_file << format_log_line(log) << "\n" << std::flush;
    if (!cfg_.out_dir.empty())
      save((fs::path(cfg_.out_dir) / "checkpoint_latest.bin").string());
    if (on_epoch && !on_epoch(log)) break;
  }
  return logs;
}

void Trainer::save(const std::string& path) const {
  CheckpointMeta meta;
  meta.config_echo = config_echo_;
  meta.epoch = state_.epoch;
  meta.global_step = state_.global_step;
  meta.frame_mean = state_.frame_mean;
  meta.frame_std = state_.frame_std;
  meta.rng_state = state_.rng.state();
  meta.rng_has_cached = state_.rng.has_cached_gauss();
  meta.rng_cached = state_.rng.cached_gauss();
  save_checkpoint(path, model_.params(), opt_, meta);
}

void Trainer::resume_from(const std::string& checkpoint_path) {
  const CheckpointMeta meta =
      load_checkpoint(checkpoint_path, model_.params(), &opt_);
  state_.epoch = meta.epoch;
  state_.global_step = meta.global_step;
  state_.frame_mean = meta.frame_mean;
  state_.frame_std = meta.frame_std;
  state_.rng.restore(meta.rng_state, meta.rng_has_cached, meta.rng_cached);
}

}  // namespace vsr
