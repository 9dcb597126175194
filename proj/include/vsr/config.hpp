#ifndef VSR_CONFIG_HPP
#define VSR_CONFIG_HPP

#include <map>
#include <string>

#include "vsr/model.hpp"
#include "vsr/reconstruct.hpp"
#include "vsr/synth.hpp"
#include "vsr/trainer.hpp"

namespace vsr {

// "key = value" sections; '#' and ';' start comments
class IniFile {
 public:
  static IniFile parse_file(const std::string& path);
  static IniFile parse_string(const std::string& text,
                              const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key,
              int fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct DecodeOptions {
  std::string mode = "greedy";  // greedy | beam | attention
  int beam_width = 8;
};

struct SynthCliOptions {
  int count = 100;
  int min_words = 2;
  int max_words = 6;
  int dwell = 3;
};

struct LmOptions {
  int order = 2;
  double discount = 0.75;
};

// aggregate of every module's knobs; the INI echo of this struct is what
// checkpoints carry
struct AppConfig {
  Stage1Config model;
  TrainConfig train;
  SynthParams synth;
  SynthCliOptions synth_cli;
  DecodeOptions decode;
  ReconstructParams reconstruct;
  LmOptions lm;

  static AppConfig from_ini(const IniFile& ini);
  std::string to_ini() const;
};

}  // namespace vsr

#endif  // VSR_CONFIG_HPP
