#include "vsr/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vsr/checkpoint.hpp"
#include "vsr/config.hpp"
#include "vsr/ctc_decode.hpp"
#include "vsr/metrics.hpp"

namespace fs = std::filesystem;

namespace vsr {

namespace {

struct GlobalOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

AppConfig load_app_config(const GlobalOpts& g) {
  AppConfig cfg;
  if (!g.config_path.empty())
    cfg = AppConfig::from_ini(IniFile::parse_file(g.config_path));
  if (g.seed_set) {
    cfg.model.seed = g.seed;
    cfg.train.seed = g.seed;
  }
  return cfg;
}

Tensor template_points(const std::string& path) {
  if (path.empty()) return canonical_lip_template();
  return load_landmark_template(path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// decode/reconstruct/augment lines may be bare token text or "id<TAB>tokens"
std::pair<std::string, std::string> split_id(const std::string& line) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos) return {"", line};
  return {line.substr(0, tab), line.substr(tab + 1)};
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw MissingFile("cannot write: " + path);
  return file;
}

int cmd_synth(const GlobalOpts& g, const std::string& lexicon_path,
              const std::string& out_dir, const std::string& sentences_path,
              const std::string& template_path, int count_override) {
  AppConfig cfg = load_app_config(g);
  if (count_override > 0) cfg.synth_cli.count = count_override;
  Lexicon lex = Lexicon::load(lexicon_path);
  const Tensor tmpl = template_points(template_path);
  const auto prototypes =
      VisemePrototypeTable::standard(tmpl, cfg.synth_cli.dwell);
  const std::uint64_t seed = g.seed_set ? g.seed : cfg.train.seed;

  std::vector<Utterance> corpus;
  if (!sentences_path.empty()) {
    int index = 0;
    char idbuf[32];
    for (const auto& line : read_lines(sentences_path)) {
      const auto words = normalize_text(line);
      if (words.empty()) continue;
      Utterance utt = synth_utterance(words, lex, prototypes, cfg.synth,
                                      seed + 1000003ULL * (index + 1));
      std::snprintf(idbuf, sizeof idbuf, "utt-%06d", index);
      utt.id = idbuf;
      corpus.push_back(std::move(utt));
      ++index;
    }
    if (corpus.empty()) throw EmptyCorpus("synth: no usable sentences");
  } else {
    corpus = synth_corpus(cfg.synth_cli.count, cfg.synth_cli.min_words,
                          cfg.synth_cli.max_words, lex, prototypes, cfg.synth,
                          seed);
  }
  const std::string manifest = save_dataset(out_dir, corpus);
  std::cout << "wrote " << corpus.size() << " utterances, manifest at "
            << manifest << "\n";
  return 0;
}

int cmd_train(const GlobalOpts& g, const std::string& train_manifest,
              const std::string& val_manifest, const std::string& out_dir,
              const std::string& resume_path,
              const std::string& template_path) {
  AppConfig cfg = load_app_config(g);
  cfg.train.out_dir = out_dir;
  auto train_set = load_dataset(train_manifest);
  std::vector<Utterance> val_set;
  if (!val_manifest.empty()) val_set = load_dataset(val_manifest);

  Stage1Model model(cfg.model, template_points(template_path));
  Trainer trainer(model, cfg.train, std::move(train_set), std::move(val_set),
                  cfg.to_ini());
  if (!resume_path.empty()) trainer.resume_from(resume_path);
  trainer.run([](const EpochLog& log) {
    std::cout << format_log_line(log) << "\n";
    return true;
  });
  std::cout << "final checkpoint: "
            << (fs::path(out_dir) / "checkpoint_latest.bin").string() << "\n";
  return 0;
}

int cmd_decode(const GlobalOpts& g, const std::string& ckpt_path,
               const std::string& manifest_path, const std::string& out_path,
               const std::string& mode_override, int beam_override,
               const std::string& template_path) {
  // model hyperparameters travel inside the checkpoint
  Stage1Config probe;  // placeholder until the echo is read
  AppConfig cfg;
  {
    // first pass: read the config echo only (params skipped via a scratch
    // model would need matching shapes, so parse the echo up front)
    std::ifstream in(ckpt_path, std::ios::binary);
    if (!in) throw MissingFile("checkpoint not found: " + ckpt_path);
  }
  // load_checkpoint validates against a model, so build it from the echo:
  // read the echo by loading into a model built from the file's own config.
  // The echo sits at the head of the payload; parse it with a light reader.
  {
    std::ifstream in(ckpt_path, std::ios::binary);
    in.seekg(8 + 4 + 8);  // magic, version, payload size
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string echo(len, '\0');
    if (!in.read(echo.data(), len))
      throw CorruptFile("checkpoint: cannot read config echo");
    cfg = AppConfig::from_ini(IniFile::parse_string(echo, ckpt_path));
  }
  if (g.seed_set) cfg.model.seed = g.seed;
  if (!mode_override.empty()) cfg.decode.mode = mode_override;
  if (beam_override > 0) cfg.decode.beam_width = beam_override;

  Stage1Model model(cfg.model, template_points(template_path));
  const CheckpointMeta meta =
      load_checkpoint(ckpt_path, model.params(), nullptr);

  const auto corpus = load_dataset(manifest_path);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  const auto& vocab = phoneme_vocab();
  for (const auto& utt : corpus) {
    Tape t;
    const FrameClip clip =
        normalize_frames(utt.frames, meta.frame_mean, meta.frame_std);
    Var fused = model.encode(t, clip, utt.landmarks);
    std::vector<int> hyp;
    if (cfg.decode.mode == "greedy") {
      hyp = ctc_greedy(t.val(model.ctc_project(t, fused)));
    } else if (cfg.decode.mode == "beam") {
      const auto nbest = ctc_prefix_beam(t.val(model.ctc_project(t, fused)),
                                         cfg.decode.beam_width);
      if (!nbest.empty()) hyp = nbest[0].tokens;
    } else if (cfg.decode.mode == "attention") {
      hyp = model.attention_greedy(t, fused, 2 * utt.frames.dim(0) + 5);
    } else {
      throw Error("decode: unknown mode '" + cfg.decode.mode + "'");
    }
    out << utt.id << '\t' << vocab.join(hyp) << '\n';
  }
  return 0;
}

int cmd_reconstruct(const GlobalOpts& g, const std::string& phoneme_path,
                    const std::string& lexicon_path, const std::string& lm_path,
                    const std::string& out_path, int beam_override) {
  AppConfig cfg = load_app_config(g);
  if (beam_override > 0) cfg.reconstruct.beam_width = beam_override;
  Lexicon lex = Lexicon::load(lexicon_path);
  NGramLM lm = NGramLM::load_arpa(lm_path);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  const auto& vocab = phoneme_vocab();
  for (const auto& line : read_lines(phoneme_path)) {
    const auto [id, text] = split_id(line);
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    const auto hyps =
        vsr::reconstruct(vocab.parse(text), lex, lm, cfg.reconstruct);
    std::string sentence;
    if (!hyps.empty()) {
      for (std::size_t i = 0; i < hyps[0].words.size(); ++i) {
        if (i) sentence += ' ';
        sentence += hyps[0].words[i];
      }
    }
    if (!id.empty()) out << id << '\t';
    out << sentence << '\n';
  }
  return 0;
}

int cmd_augment(const GlobalOpts& g, const std::string& phoneme_path,
                double rate, const std::string& out_path) {
  AppConfig cfg = load_app_config(g);
  const std::uint64_t seed = g.seed_set ? g.seed : cfg.train.seed;
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  const auto& vocab = phoneme_vocab();
  std::uint64_t line_index = 0;
  for (const auto& line : read_lines(phoneme_path)) {
    const auto [id, text] = split_id(line);
    ++line_index;
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    const auto noisy =
        augment_phonemes(vocab.parse(text), rate, seed + line_index);
    if (!id.empty()) out << id << '\t';
    out << vocab.join(noisy) << '\n';
  }
  return 0;
}

int cmd_g2p(const std::string& lexicon_path, const std::string& text,
            const std::string& file_path, const std::string& out_path) {
  Lexicon lex = Lexicon::load(lexicon_path);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  const auto& vocab = phoneme_vocab();
  std::vector<std::string> lines;
  if (!text.empty()) lines.push_back(text);
  if (!file_path.empty())
    for (const auto& line : read_lines(file_path)) lines.push_back(line);
  for (const auto& line : lines) {
    const auto words = normalize_text(line);
    if (words.empty()) continue;
    out << vocab.join(g2p(words, lex)) << '\n';
  }
  return 0;
}

int cmd_score(const std::string& ref_path, const std::string& hyp_path,
              const std::string& unit) {
  const auto ref_lines = read_lines(ref_path);
  const auto hyp_lines = read_lines(hyp_path);
  if (ref_lines.size() != hyp_lines.size())
    throw LengthMismatch("score: reference and hypothesis line counts differ");
  long long dist = 0, total = 0;
  for (std::size_t i = 0; i < ref_lines.size(); ++i) {
    std::istringstream rs(split_id(ref_lines[i]).second);
    std::istringstream hs(split_id(hyp_lines[i]).second);
    std::vector<std::string> ref, hyp;
    std::string tok;
    while (rs >> tok) ref.push_back(tok);
    while (hs >> tok) hyp.push_back(tok);
    if (ref.empty() && hyp.empty()) continue;
    if (ref.empty()) throw EmptyReference("score: empty reference line " +
                                          std::to_string(i + 1));
    const EditStats stats = edit_align(ref, hyp);
    dist += stats.distance();
    total += stats.ref_len;
  }
  if (total == 0) throw EmptyReference("score: nothing to score");
  const double rate = static_cast<double>(dist) / static_cast<double>(total);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s %.4f", unit == "phonemes" ? "PER" : "WER",
                rate);
  std::cout << buf << "\n";
  return 0;
}

int cmd_lm_train(const std::string& corpus_path, const std::string& out_path,
                 int order, double discount) {
  std::vector<std::vector<std::string>> corpus;
  for (const auto& line : read_lines(corpus_path)) {
    const auto words = normalize_text(line);
    if (!words.empty()) corpus.push_back(words);
  }
  NGramLM lm = NGramLM::estimate(corpus, order, discount);
  lm.save_arpa(out_path);
  std::cout << "wrote " << order << "-gram model to " << out_path << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"phoneme-centric visual speech recognition toolkit"};
  app.require_subcommand(1);
  app.fallthrough(true);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "INI configuration file");
  app.add_option("--seed", g.seed, "seed override")->each([&g](const std::string&) {
    g.seed_set = true;
  });

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string sy_lexicon, sy_out, sy_sentences, sy_template;
  int sy_count = 0;
  synth->add_option("--lexicon", sy_lexicon, "lexicon file")->required();
  synth->add_option("--out", sy_out, "output corpus directory")->required();
  synth->add_option("--sentences", sy_sentences, "text file, one sentence per line");
  synth->add_option("--count", sy_count, "number of random sentences");
  synth->add_option("--template", sy_template, "landmark template file");

  // train
  auto* train = app.add_subcommand("train", "train the phoneme predictor");
  std::string tr_train, tr_val, tr_out, tr_resume, tr_template;
  train->add_option("--train", tr_train, "training manifest")->required();
  train->add_option("--val", tr_val, "held-out manifest");
  train->add_option("--out", tr_out, "output directory")->required();
  train->add_option("--resume", tr_resume, "checkpoint to resume from");
  train->add_option("--template", tr_template, "landmark template file");

  // decode
  auto* decode = app.add_subcommand("decode", "phoneme decoding");
  std::string de_ckpt, de_manifest, de_out, de_mode, de_template;
  int de_beam = 0;
  decode->add_option("--ckpt", de_ckpt, "checkpoint")->required();
  decode->add_option("--manifest", de_manifest, "dataset manifest")->required();
  decode->add_option("--out", de_out, "output file (stdout when absent)");
  decode->add_option("--mode", de_mode, "greedy | beam | attention");
  decode->add_option("--beam-width", de_beam, "beam width");
  decode->add_option("--template", de_template, "landmark template file");

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "phonemes to sentences");
  std::string re_phonemes, re_lexicon, re_lm, re_out;
  int re_beam = 0;
  recon->add_option("--phonemes", re_phonemes, "phoneme file")->required();
  recon->add_option("--lexicon", re_lexicon, "lexicon file")->required();
  recon->add_option("--lm", re_lm, "ARPA language model")->required();
  recon->add_option("--out", re_out, "output file (stdout when absent)");
  recon->add_option("--beam-width", re_beam, "beam width");

  // augment
  auto* augment = app.add_subcommand("augment", "phoneme noise injection");
  std::string au_phonemes, au_out;
  double au_rate = 0.1;
  augment->add_option("--phonemes", au_phonemes, "phoneme file")->required();
  augment->add_option("--rate", au_rate, "per-token error rate")->required();
  augment->add_option("--out", au_out, "output file (stdout when absent)");

  // g2p
  auto* g2p_cmd = app.add_subcommand("g2p", "grapheme to phoneme conversion");
  std::string gp_lexicon, gp_text, gp_file, gp_out;
  g2p_cmd->add_option("--lexicon", gp_lexicon, "lexicon file")->required();
  g2p_cmd->add_option("--text", gp_text, "sentence to convert");
  g2p_cmd->add_option("--file", gp_file, "text file, one sentence per line");
  g2p_cmd->add_option("--out", gp_out, "output file (stdout when absent)");

  // score
  auto* score = app.add_subcommand("score", "error-rate scoring");
  std::string sc_ref, sc_hyp, sc_unit = "words";
  score->add_option("--ref", sc_ref, "reference file")->required();
  score->add_option("--hyp", sc_hyp, "hypothesis file")->required();
  score->add_option("--unit", sc_unit, "words | phonemes");

  // lm-train
  auto* lm_train = app.add_subcommand("lm-train", "estimate an n-gram model");
  std::string lt_corpus, lt_out;
  int lt_order = 2;
  double lt_discount = 0.75;
  lm_train->add_option("--corpus", lt_corpus, "text corpus")->required();
  lm_train->add_option("--out", lt_out, "output ARPA file")->required();
  lm_train->add_option("--order", lt_order, "n-gram order");
  lm_train->add_option("--discount", lt_discount, "absolute discount");

  std::vector<std::string> argv_storage = args;
  std::vector<const char*> argv;
  argv.push_back("vsr");
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed())
      return cmd_synth(g, sy_lexicon, sy_out, sy_sentences, sy_template,
                       sy_count);
    if (train->parsed())
      return cmd_train(g, tr_train, tr_val, tr_out, tr_resume, tr_template);
    if (decode->parsed())
      return cmd_decode(g, de_ckpt, de_manifest, de_out, de_mode, de_beam,
                        de_template);
    if (recon->parsed())
      return cmd_reconstruct(g, re_phonemes, re_lexicon, re_lm, re_out,
                             re_beam);
    if (augment->parsed()) return cmd_augment(g, au_phonemes, au_rate, au_out);
    if (g2p_cmd->parsed()) return cmd_g2p(gp_lexicon, gp_text, gp_file, gp_out);
    if (score->parsed()) return cmd_score(sc_ref, sc_hyp, sc_unit);
    if (lm_train->parsed())
      return cmd_lm_train(lt_corpus, lt_out, lt_order, lt_discount);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace vsr
