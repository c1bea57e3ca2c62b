#pragma once

#include "mcam/metric.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mcam {

// Rank-n recognition rates, r(n) for n = 1..|G|. Monotone non-decreasing.
struct CmcCurve {
  std::vector<double> rates;

  // rank is 1-based; ranks past the gallery size saturate at the last value.
  double rank(int n) const {
    if (rates.empty()) return 0.0;
    if (n >= static_cast<int>(rates.size())) return rates.back();
    return rates[n - 1];
  }
};

CmcCurve cmc_curve(const SimilarityMatrix& sim,
                   const std::vector<std::string>& query_persons,
                   const std::vector<std::string>& gallery_persons);

enum class ProtocolMode { PairwiseCameras, RandomHalfSplit, FixedSets };

struct ProtocolConfig {
  ProtocolMode mode = ProtocolMode::RandomHalfSplit;
  int trials = 10;
  std::uint64_t seed = 0;
  int min_track_length = 0;  // 0 disables the filter
  std::string query_camera;  // split/fixed modes; empty = first camera
  std::string gallery_camera;
  std::string dataset_root;
};

struct PipelineOptions {
  RegionLayout layout = default_region_layout();
  std::vector<FeatureChannelId> channels = {
      FeatureChannelId::Csh, FeatureChannelId::Hog, FeatureChannelId::Bcov};
  MetricConfig metric;
  std::uint64_t seed = 0;
};

struct ProtocolResult {
  CmcCurve averaged;
  std::vector<double> stddev;  // per-rank sample standard deviation
  std::vector<CmcCurve> per_trial;
};

// Core protocol runner over prebuilt signatures. `person_of_track` maps every
// track id to its ground-truth person.
ProtocolResult run_protocol(const ProtocolConfig& cfg,
                            const MetricConfig& metric,
                            const std::vector<FeatureChannelId>& channels,
                            const std::vector<McamSignature>& signatures,
                            const std::map<std::string, std::string>&
                                person_of_track);

// Convenience runner that builds signatures from raw tracks first.
ProtocolResult run_protocol(const ProtocolConfig& cfg,
                            const PipelineOptions& pipeline,
                            const std::vector<PersonTrack>& tracks);

std::vector<McamSignature> build_signatures(
    const std::vector<PersonTrack>& tracks, const PipelineOptions& pipeline);

// Synthetic person-track generator used for dataset-free verification:
// per-identity palette and stripe texture, per-camera tint, per-mode
// illumination shift over a contiguous frame span, optional fragmentation.
struct SyntheticSpec {
  int identities = 10;
  int cameras = 2;
  int frames_per_track = 10;
  int modes_per_identity = 1;
  double separation = 0.2;       // inter-identity appearance separation
  double noise = 0.01;           // intra-mode appearance noise
  double fragmentation = 0.0;    // probability a track is split in two
  std::vector<double> mode_fractions;  // optional span fractions, sums to 1
  int frame_w = 48;
  int frame_h = 144;
};

std::vector<PersonTrack> generate_synthetic_tracks(const SyntheticSpec& spec,
                                                   std::uint64_t seed);

}  // namespace mcam
