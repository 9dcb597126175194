#ifndef VSR_MANIFEST_HPP
#define VSR_MANIFEST_HPP

#include <string>
#include <vector>

#include "vsr/synth.hpp"

namespace vsr {

// per-utterance file formats
void write_phoneme_file(const std::string& path, const std::vector<int>& seq);
std::vector<int> read_phoneme_file(const std::string& path);

// one line per frame, 234 whitespace-separated reals (x0 y0 x1 y1 ...);
// an all-zero line is an invalid (zero-padded) frame
void write_landmark_file(const std::string& path, const LandmarkClip& clip);
LandmarkClip read_landmark_file(const std::string& path);

// flat binary: int32 T,H,W header then row-major float64 values
void write_frame_file(const std::string& path, const Tensor& frames);
Tensor read_frame_file(const std::string& path);

struct ManifestEntry {
  std::string id;
  std::string text;
  std::string phoneme_file;
  std::string landmark_file;
  std::string frame_file;
};

// line-delimited JSON records; paths are relative to the manifest location
void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> load_manifest(const std::string& path);

// materializes a corpus under dir/ (phn/, lmk/, frm/ plus manifest.jsonl)
// and returns the manifest path
std::string save_dataset(const std::string& dir,
                         const std::vector<Utterance>& corpus);

// loads utterances behind a manifest and validates their invariants
std::vector<Utterance> load_dataset(const std::string& manifest_path);

}  // namespace vsr

#endif  // VSR_MANIFEST_HPP
