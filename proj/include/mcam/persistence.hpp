#pragma once

#include "mcam/evaluation.hpp"
#include "mcam/image.hpp"
#include "mcam/mixture.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mcam {

// Natural-numeric string ordering: digit runs compare by value, so
// "frame_2" sorts before "frame_10".
bool natural_less(const std::string& a, const std::string& b);

Image load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const Image& image);

struct TrackEntry {
  std::string camera_id;
  std::string person_id;
  std::string track_id;
  std::vector<std::filesystem::path> frame_files;  // natural-numeric order

  int length() const { return static_cast<int>(frame_files.size()); }
};

struct DatasetIndex {
  std::filesystem::path root;
  std::vector<TrackEntry> entries;
  std::vector<std::string> warnings;
};

// Scans root/<camera>/<person>/<track>/<frame>.{png,jpg,jpeg}; files placed
// directly under a person directory form the shorthand track "0". Frames
// that fail to decode are dropped with a warning; empty tracks are skipped.
DatasetIndex ingest_dataset(const std::filesystem::path& root);

PersonTrack load_track(const TrackEntry& entry);

void save_dataset(const std::filesystem::path& root,
                  const std::vector<PersonTrack>& tracks);

std::uint64_t config_hash(const PipelineOptions& pipeline);

struct SignatureFile {
  int version = 1;
  std::uint64_t config_hash = 0;
  std::vector<McamSignature> signatures;
};

void save_signatures(const std::filesystem::path& path,
                     const std::vector<McamSignature>& signatures,
                     std::uint64_t config_hash);
SignatureFile load_signatures(const std::filesystem::path& path);

void write_similarity_results(const std::filesystem::path& path,
                              const SimilarityMatrix& sim);
void write_cmc_table(const std::filesystem::path& path,
                     const ProtocolResult& result);

// Flat key=value configuration file; '#' starts a comment.
std::map<std::string, std::string> load_key_value_config(
    const std::filesystem::path& path);

// Applies recognized keys onto the pipeline/protocol settings. Unknown keys
// raise InvalidConfig. MCAM_DATASET_ROOT overrides dataset.root.
struct RuntimeConfig {
  PipelineOptions pipeline;
  ProtocolConfig protocol;
  SyntheticSpec synth;
  std::string dataset_root;
  int threads = 0;  // 0 = all available cores
};

void apply_config(const std::map<std::string, std::string>& kv,
                  RuntimeConfig& cfg);

}  // namespace mcam
