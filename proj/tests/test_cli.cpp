#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vsr/cli.hpp"
#include "vsr/manifest.hpp"

namespace fs = std::filesystem;

namespace {

struct CaptureStdout {
  std::ostringstream captured;
  std::streambuf* saved;
  CaptureStdout() : saved(std::cout.rdbuf(captured.rdbuf())) {}
  ~CaptureStdout() { std::cout.rdbuf(saved); }
};

std::string lexicon_path() {
  return std::string(VSR_SOURCE_DIR) + "/data/lexicon.txt";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("score of identical files prints WER 0.0000") {
  write_file("cli_ref.txt", "AND THE NEXT DAY\nCOME BACK\n");
  CaptureStdout cap;
  const int rc =
      vsr::run_cli({"score", "--ref", "cli_ref.txt", "--hyp", "cli_ref.txt"});
  CHECK(rc == 0);
  CHECK(cap.captured.str() == "WER 0.0000\n");
  std::remove("cli_ref.txt");
}

TEST_CASE("score reports corpus-level rates and phoneme units") {
  write_file("cli_ref2.txt", "A B C D E F G H I J\n");
  write_file("cli_hyp2.txt", "A B X D E F H I J K\n");  // sub, del, ins
  CaptureStdout cap;
  const int rc = vsr::run_cli({"score", "--ref", "cli_ref2.txt", "--hyp",
                               "cli_hyp2.txt", "--unit", "phonemes"});
  CHECK(rc == 0);
  CHECK(cap.captured.str() == "PER 0.3000\n");
  std::remove("cli_ref2.txt");
  std::remove("cli_hyp2.txt");
}

TEST_CASE("g2p subcommand reproduces the example sentence") {
  CaptureStdout cap;
  const int rc = vsr::run_cli({"g2p", "--lexicon", lexicon_path(), "--text",
                               "and the next day."});
  CHECK(rc == 0);
  CHECK(cap.captured.str() == "AH N D _ DH AH _ N EH K S T _ D EY\n");
}

TEST_CASE("usage errors exit 2, runtime errors exit 1") {
  CHECK(vsr::run_cli({"no-such-command"}) == 2);
  CHECK(vsr::run_cli({"score", "--ref", "only.txt"}) == 2);  // missing --hyp
  CHECK(vsr::run_cli({"g2p", "--lexicon", "missing_lexicon.txt", "--text",
                      "HELLO"}) == 1);
  // digits are a documented rejection
  CHECK(vsr::run_cli({"g2p", "--lexicon", lexicon_path(), "--text",
                      "in 2024"}) == 1);
}

TEST_CASE("augment pipeline is deterministic per seed") {
  write_file("cli_phn.txt", "K AH M _ B AE K\nD EY\n");
  CHECK(vsr::run_cli({"--seed", "7", "augment", "--phonemes", "cli_phn.txt",
                      "--rate", "0.3", "--out", "cli_noisy1.txt"}) == 0);
  CHECK(vsr::run_cli({"--seed", "7", "augment", "--phonemes", "cli_phn.txt",
                      "--rate", "0.3", "--out", "cli_noisy2.txt"}) == 0);
  CHECK(slurp("cli_noisy1.txt") == slurp("cli_noisy2.txt"));
  for (const char* f : {"cli_phn.txt", "cli_noisy1.txt", "cli_noisy2.txt"})
    std::remove(f);
}

TEST_CASE("lm-train writes a loadable ARPA file and reconstruct consumes it") {
  write_file("cli_corpus.txt",
             "come back\ncome back soon\ngo back\nthe next day\n"
             "and the next day\nsee you soon\n");
  CHECK(vsr::run_cli({"lm-train", "--corpus", "cli_corpus.txt", "--out",
                      "cli_lm.arpa", "--order", "2"}) == 0);

  write_file("cli_recon_in.txt", "K AH M _ B AE K\n");
  CHECK(vsr::run_cli({"reconstruct", "--phonemes", "cli_recon_in.txt",
                      "--lexicon", lexicon_path(), "--lm", "cli_lm.arpa",
                      "--out", "cli_recon_out.txt"}) == 0);
  CHECK(slurp("cli_recon_out.txt") == "COME BACK\n");
  for (const char* f : {"cli_corpus.txt", "cli_lm.arpa", "cli_recon_in.txt",
                        "cli_recon_out.txt"})
    std::remove(f);
}

TEST_CASE("synth, train, decode and score form a working pipeline") {
  const std::string dir = "cli_pipeline";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // small lexicon for a fast end-to-end pass
  write_file(dir + "/lex.txt", "GO G OW\nSEE S IY\nDAY D EY\n");
  write_file(dir + "/cfg.ini",
             "[model]\nd_enc = 8\nencoder_layers = 1\ndecoder_layers = 1\n"
             "heads = 2\nfront_channels = 2\nresidual_blocks = 1\n"
             "stgcn_channels = 4\nstgcn_blocks = 2\nstgcn_temporal_kernel = 3\n"
             "fusion_hidden = 12\nffn_hidden = 16\ncrop = 12\n"
             "[train]\nepochs = 2\nwarmup_epochs = 1\nframe_cap = 64\n"
             "[synth]\nrender_h = 12\nrender_w = 12\ncount = 6\n"
             "min_words = 1\nmax_words = 2\ndwell = 2\n");

  CHECK(vsr::run_cli({"--config", dir + "/cfg.ini", "--seed", "3", "synth",
                      "--lexicon", dir + "/lex.txt", "--out",
                      dir + "/corpus"}) == 0);
  CHECK(fs::exists(dir + "/corpus/manifest.jsonl"));

  CHECK(vsr::run_cli({"--config", dir + "/cfg.ini", "train", "--train",
                      dir + "/corpus/manifest.jsonl", "--val",
                      dir + "/corpus/manifest.jsonl", "--out",
                      dir + "/run"}) == 0);
  CHECK(fs::exists(dir + "/run/checkpoint_latest.bin"));
  CHECK(fs::exists(dir + "/run/metrics.jsonl"));

  CHECK(vsr::run_cli({"decode", "--ckpt", dir + "/run/checkpoint_latest.bin",
                      "--manifest", dir + "/corpus/manifest.jsonl", "--out",
                      dir + "/hyp.txt"}) == 0);
  CHECK(fs::exists(dir + "/hyp.txt"));

  // attention decoding also runs
  CHECK(vsr::run_cli({"decode", "--ckpt", dir + "/run/checkpoint_latest.bin",
                      "--manifest", dir + "/corpus/manifest.jsonl", "--mode",
                      "attention", "--out", dir + "/hyp_att.txt"}) == 0);

  // build a reference phoneme file from the manifest and score the decode
  {
    std::ofstream ref(dir + "/ref.txt");
    for (const auto& utt : vsr::load_dataset(dir + "/corpus/manifest.jsonl"))
      ref << utt.id << '\t' << vsr::phoneme_vocab().join(utt.phonemes) << "\n";
  }
  CaptureStdout cap;
  CHECK(vsr::run_cli({"score", "--ref", dir + "/ref.txt", "--hyp",
                      dir + "/hyp.txt", "--unit", "phonemes"}) == 0);
  CHECK(cap.captured.str().substr(0, 4) == "PER ");
  fs::remove_all(dir);
}
