#include "vsr/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "vsr/errors.hpp"

namespace vsr {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

IniFile IniFile::parse_string(const std::string& text,
                              const std::string& origin) {
  IniFile ini;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(origin + ":" + std::to_string(line_no) +
                         ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError(origin + ":" + std::to_string(line_no) + ": empty key");
    ini.sections_[section][key] = value;
  }
  return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("config file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.find(key) != s->second.end();
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
  if (!has(section, key)) return fallback;
  try {
    return std::stod(get(section, key, ""));
  } catch (const std::exception&) {
    throw ParseError("config: bad number for [" + section + "] " + key);
  }
}

int IniFile::get_int(const std::string& section, const std::string& key,
                     int fallback) const {
  if (!has(section, key)) return fallback;
  try {
    return std::stoi(get(section, key, ""));
  } catch (const std::exception&) {
    throw ParseError("config: bad integer for [" + section + "] " + key);
  }
}

bool IniFile::get_bool(const std::string& section, const std::string& key,
                       bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParseError("config: bad boolean for [" + section + "] " + key);
}

std::uint64_t IniFile::get_u64(const std::string& section,
                               const std::string& key,
                               std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  try {
    return std::stoull(get(section, key, ""));
  } catch (const std::exception&) {
    throw ParseError("config: bad integer for [" + section + "] " + key);
  }
}

AppConfig AppConfig::from_ini(const IniFile& ini) {
  AppConfig cfg;
  Stage1Config& m = cfg.model;
  m.d_enc = ini.get_int("model", "d_enc", m.d_enc);
  m.encoder_layers = ini.get_int("model", "encoder_layers", m.encoder_layers);
  m.decoder_layers = ini.get_int("model", "decoder_layers", m.decoder_layers);
  m.heads = ini.get_int("model", "heads", m.heads);
  m.conv_kt = ini.get_int("model", "conv_kt", m.conv_kt);
  m.conv_kh = ini.get_int("model", "conv_kh", m.conv_kh);
  m.conv_kw = ini.get_int("model", "conv_kw", m.conv_kw);
  m.conv_st = ini.get_int("model", "conv_st", m.conv_st);
  m.conv_sh = ini.get_int("model", "conv_sh", m.conv_sh);
  m.conv_sw = ini.get_int("model", "conv_sw", m.conv_sw);
  m.front_channels = ini.get_int("model", "front_channels", m.front_channels);
  m.residual_blocks = ini.get_int("model", "residual_blocks", m.residual_blocks);
  m.crop = ini.get_int("model", "crop", m.crop);
  m.stgcn_channels = ini.get_int("model", "stgcn_channels", m.stgcn_channels);
  m.stgcn_blocks = ini.get_int("model", "stgcn_blocks", m.stgcn_blocks);
  m.stgcn_temporal_kernel =
      ini.get_int("model", "stgcn_temporal_kernel", m.stgcn_temporal_kernel);
  m.graph_knn = ini.get_int("model", "graph_knn", m.graph_knn);
  m.use_landmarks = ini.get_bool("model", "use_landmarks", m.use_landmarks);
  m.fusion_hidden = ini.get_int("model", "fusion_hidden", m.fusion_hidden);
  m.ffn_hidden = ini.get_int("model", "ffn_hidden", m.ffn_hidden);
  m.encoder_conv_block =
      ini.get_bool("model", "encoder_conv_block", m.encoder_conv_block);
  m.seed = ini.get_u64("model", "seed", m.seed);

  TrainConfig& t = cfg.train;
  t.epochs = ini.get_int("train", "epochs", t.epochs);
  t.warmup_epochs = ini.get_int("train", "warmup_epochs", t.warmup_epochs);
  t.lr_init = ini.get_double("train", "lr_init", t.lr_init);
  t.lr_min = ini.get_double("train", "lr_min", t.lr_min);
  t.frame_cap = ini.get_int("train", "frame_cap", t.frame_cap);
  t.loss.alpha = ini.get_double("train", "alpha", t.loss.alpha);
  t.loss.label_smoothing =
      ini.get_double("train", "label_smoothing", t.loss.label_smoothing);
  t.adamw.beta1 = ini.get_double("train", "beta1", t.adamw.beta1);
  t.adamw.beta2 = ini.get_double("train", "beta2", t.adamw.beta2);
  t.adamw.eps = ini.get_double("train", "eps", t.adamw.eps);
  t.adamw.weight_decay =
      ini.get_double("train", "weight_decay", t.adamw.weight_decay);
  t.seed = ini.get_u64("train", "seed", t.seed);

  SynthParams& s = cfg.synth;
  s.noise_sigma = ini.get_double("synth", "noise_sigma", s.noise_sigma);
  s.render_h = ini.get_int("synth", "render_h", s.render_h);
  s.render_w = ini.get_int("synth", "render_w", s.render_w);
  s.blob_sigma_px = ini.get_double("synth", "blob_sigma_px", s.blob_sigma_px);
  s.speaker_jitter = ini.get_double("synth", "speaker_jitter", s.speaker_jitter);
  cfg.synth_cli.count = ini.get_int("synth", "count", cfg.synth_cli.count);
  cfg.synth_cli.min_words =
      ini.get_int("synth", "min_words", cfg.synth_cli.min_words);
  cfg.synth_cli.max_words =
      ini.get_int("synth", "max_words", cfg.synth_cli.max_words);
  cfg.synth_cli.dwell = ini.get_int("synth", "dwell", cfg.synth_cli.dwell);

  cfg.decode.mode = ini.get("decode", "mode", cfg.decode.mode);
  cfg.decode.beam_width =
      ini.get_int("decode", "beam_width", cfg.decode.beam_width);

  ReconstructParams& r = cfg.reconstruct;
  r.beam_width = ini.get_int("reconstruct", "beam_width", r.beam_width);
  r.sub_cost = ini.get_double("reconstruct", "sub_cost", r.sub_cost);
  r.ins_cost = ini.get_double("reconstruct", "ins_cost", r.ins_cost);
  r.del_cost = ini.get_double("reconstruct", "del_cost", r.del_cost);
  r.lm_weight = ini.get_double("reconstruct", "lm_weight", r.lm_weight);
  r.word_bonus = ini.get_double("reconstruct", "word_bonus", r.word_bonus);
  r.max_span_slack =
      ini.get_int("reconstruct", "max_span_slack", r.max_span_slack);

  cfg.lm.order = ini.get_int("lm", "order", cfg.lm.order);
  cfg.lm.discount = ini.get_double("lm", "discount", cfg.lm.discount);
  return cfg;
}

std::string AppConfig::to_ini() const {
  char buf[4096];
  std::snprintf(
      buf, sizeof buf,
      "[model]\n"
      "d_enc = %d\nencoder_layers = %d\ndecoder_layers = %d\nheads = %d\n"
      "conv_kt = %d\nconv_kh = %d\nconv_kw = %d\n"
      "conv_st = %d\nconv_sh = %d\nconv_sw = %d\n"
      "front_channels = %d\nresidual_blocks = %d\ncrop = %d\n"
      "stgcn_channels = %d\nstgcn_blocks = %d\nstgcn_temporal_kernel = %d\n"
      "graph_knn = %d\nuse_landmarks = %s\nfusion_hidden = %d\n"
      "ffn_hidden = %d\nencoder_conv_block = %s\nseed = %llu\n"
      "\n[train]\n"
      "epochs = %d\nwarmup_epochs = %d\nlr_init = %.17g\nlr_min = %.17g\n"
      "frame_cap = %d\nalpha = %.17g\nlabel_smoothing = %.17g\n"
      "beta1 = %.17g\nbeta2 = %.17g\neps = %.17g\nweight_decay = %.17g\n"
      "seed = %llu\n"
      "\n[synth]\n"
      "noise_sigma = %.17g\nrender_h = %d\nrender_w = %d\n"
      "blob_sigma_px = %.17g\nspeaker_jitter = %.17g\n"
      "count = %d\nmin_words = %d\nmax_words = %d\ndwell = %d\n"
      "\n[decode]\nmode = %s\nbeam_width = %d\n"
      "\n[reconstruct]\n"
      "beam_width = %d\nsub_cost = %.17g\nins_cost = %.17g\ndel_cost = %.17g\n"
      "lm_weight = %.17g\nword_bonus = %.17g\nmax_span_slack = %d\n"
      "\n[lm]\norder = %d\ndiscount = %.17g\n",
      model.d_enc, model.encoder_layers, model.decoder_layers, model.heads,
      model.conv_kt, model.conv_kh, model.conv_kw, model.conv_st,
      model.conv_sh, model.conv_sw, model.front_channels,
      model.residual_blocks, model.crop, model.stgcn_channels,
      model.stgcn_blocks, model.stgcn_temporal_kernel, model.graph_knn,
      model.use_landmarks ? "true" : "false", model.fusion_hidden,
      model.ffn_hidden, model.encoder_conv_block ? "true" : "false",
      static_cast<unsigned long long>(model.seed), train.epochs,
      train.warmup_epochs, train.lr_init, train.lr_min, train.frame_cap,
      train.loss.alpha, train.loss.label_smoothing, train.adamw.beta1,
      train.adamw.beta2, train.adamw.eps, train.adamw.weight_decay,
      static_cast<unsigned long long>(train.seed), synth.noise_sigma,
      synth.render_h, synth.render_w, synth.blob_sigma_px,
      synth.speaker_jitter, synth_cli.count, synth_cli.min_words,
      synth_cli.max_words, synth_cli.dwell, decode.mode.c_str(),
      decode.beam_width, reconstruct.beam_width, reconstruct.sub_cost,
      reconstruct.ins_cost, reconstruct.del_cost, reconstruct.lm_weight,
      reconstruct.word_bonus, reconstruct.max_span_slack, lm.order,
      lm.discount);
  return buf;
}

}  // namespace vsr
