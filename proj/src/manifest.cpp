#include "vsr/manifest.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vsr/errors.hpp"
#include "vsr/graph.hpp"

namespace fs = std::filesystem;

namespace vsr {

void write_phoneme_file(const std::string& path, const std::vector<int>& seq) {
  std::ofstream out(path);
  if (!out) throw MissingFile("cannot write phoneme file: " + path);
  out << phoneme_vocab().join(seq) << '\n';
}

std::vector<int> read_phoneme_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("phoneme file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return phoneme_vocab().parse(buf.str());
}

void write_landmark_file(const std::string& path, const LandmarkClip& clip) {
  std::ofstream out(path);
  if (!out) throw MissingFile("cannot write landmark file: " + path);
  char buf[32];
  for (int f = 0; f < clip.length(); ++f) {
    for (int p = 0; p < lip_template::kPointCount; ++p)
      for (int c = 0; c < 2; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", clip.frames.at({f, p, c}));
        out << (p == 0 && c == 0 ? "" : " ") << buf;
      }
    out << '\n';
  }
}

LandmarkClip read_landmark_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("landmark file not found: " + path);
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  int frames = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream is(line);
    double v;
    int count = 0;
    while (is >> v) {
      values.push_back(v);
      ++count;
    }
    if (count != 2 * lip_template::kPointCount)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(2 * lip_template::kPointCount) +
                       " values, got " + std::to_string(count));
    ++frames;
  }
  if (frames == 0) throw EmptyClip("landmark file has no frames: " + path);
  LandmarkClip clip;
  clip.frames = Tensor({frames, lip_template::kPointCount, 2},
                       std::move(values));
  clip.valid.assign(static_cast<std::size_t>(frames), false);
  for (int f = 0; f < frames; ++f)
    for (int p = 0; p < lip_template::kPointCount && !clip.valid[f]; ++p)
      if (clip.frames.at({f, p, 0}) != 0.0 || clip.frames.at({f, p, 1}) != 0.0)
        clip.valid[static_cast<std::size_t>(f)] = true;
  return clip;
}

void write_frame_file(const std::string& path, const Tensor& frames) {
  check_shape(frames.ndim() == 3, "frame file: tensor must be [T,H,W]");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingFile("cannot write frame file: " + path);
  const std::int32_t hdr[3] = {frames.dim(0), frames.dim(1), frames.dim(2)};
  out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  out.write(reinterpret_cast<const char*>(frames.data.data()),
            static_cast<std::streamsize>(frames.data.size() * sizeof(double)));
}

Tensor read_frame_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("frame file not found: " + path);
  std::int32_t hdr[3];
  if (!in.read(reinterpret_cast<char*>(hdr), sizeof hdr))
    throw ParseError("frame file truncated header: " + path);
  if (hdr[0] < 1 || hdr[1] < 1 || hdr[2] < 1)
    throw ParseError("frame file has bad dimensions: " + path);
  Tensor t({hdr[0], hdr[1], hdr[2]});
  if (!in.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(double))))
    throw ParseError("frame file truncated payload: " + path);
  return t;
}

void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw MissingFile("cannot write manifest: " + path);
  for (const auto& e : entries) {
    nlohmann::json j;
    j["id"] = e.id;
    j["text"] = e.text;
    j["phoneme_file"] = e.phoneme_file;
    j["landmark_file"] = e.landmark_file;
    j["frame_file"] = e.frame_file;
    out << j.dump() << '\n';
  }
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("manifest not found: " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ManifestEntry entry;
    try {
      entry.id = j.at("id").get<std::string>();
      entry.text = j.at("text").get<std::string>();
      entry.phoneme_file = j.at("phoneme_file").get<std::string>();
      entry.landmark_file = j.at("landmark_file").get<std::string>();
      entry.frame_file = j.at("frame_file").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::string save_dataset(const std::string& dir,
                         const std::vector<Utterance>& corpus) {
  fs::create_directories(fs::path(dir) / "phn");
  fs::create_directories(fs::path(dir) / "lmk");
  fs::create_directories(fs::path(dir) / "frm");
  std::vector<ManifestEntry> entries;
  for (const auto& utt : corpus) {
    ManifestEntry e;
    e.id = utt.id;
    std::string text;
    for (std::size_t i = 0; i < utt.words.size(); ++i) {
      if (i) text += ' ';
      text += utt.words[i];
    }
    e.text = text;
    e.phoneme_file = "phn/" + utt.id + ".txt";
    e.landmark_file = "lmk/" + utt.id + ".txt";
    e.frame_file = "frm/" + utt.id + ".bin";
    write_phoneme_file((fs::path(dir) / e.phoneme_file).string(), utt.phonemes);
    write_landmark_file((fs::path(dir) / e.landmark_file).string(),
                        utt.landmarks);
    write_frame_file((fs::path(dir) / e.frame_file).string(), utt.frames);
    entries.push_back(std::move(e));
  }
  const std::string manifest = (fs::path(dir) / "manifest.jsonl").string();
  write_manifest(manifest, entries);
  return manifest;
}

std::vector<Utterance> load_dataset(const std::string& manifest_path) {
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<Utterance> corpus;
  for (const auto& e : load_manifest(manifest_path)) {
    Utterance utt;
    utt.id = e.id;
    std::istringstream is(e.text);
    std::string w;
    while (is >> w) utt.words.push_back(w);
    utt.phonemes = read_phoneme_file((base / e.phoneme_file).string());
    utt.landmarks = read_landmark_file((base / e.landmark_file).string());
    utt.frames = read_frame_file((base / e.frame_file).string());
    utt.landmarks.validate();
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

}  // namespace vsr
