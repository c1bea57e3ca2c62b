#pragma once

#include "mcam/features.hpp"
#include "mcam/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mcam {

// Variance floor; keeps log variance ratios finite in the Riemannian metric.
inline constexpr double kVarianceFloor = 1e-6;

struct GaussianComponent {
  double prior = 0.0;
  std::vector<double> mean;
  std::vector<double> var;  // diagonal, entries >= kVarianceFloor

  int dim() const { return static_cast<int>(mean.size()); }
};

struct AppearanceMixture {
  FeatureChannelId channel = FeatureChannelId::Csh;
  std::vector<GaussianComponent> components;

  int component_count() const { return static_cast<int>(components.size()); }
};

// One appearance mixture per configured feature channel, plus track identity
// and length.
struct McamSignature {
  std::string track_id;
  std::string camera_id;
  int n_frames = 0;
  std::vector<AppearanceMixture> mixtures;

  const AppearanceMixture& mixture(FeatureChannelId channel) const;
  bool has_channel(FeatureChannelId channel) const;
};

using DescriptorSet = std::vector<std::vector<double>>;

struct ClusteringResult {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignment;   // one centroid index per descriptor
  double distortion_sum = 0.0;   // sum of L2 distances to assigned centroid

  int k() const { return static_cast<int>(centroids.size()); }
};

// kmeans++ seeding followed by at most 10 Lloyd iterations (or until the
// assignment is stable). Deterministic given (descriptors, k, seed);
// assignment ties break to the lowest centroid index and empty clusters are
// re-seeded to the point farthest from its centroid.
ClusteringResult kmeans_cluster(const DescriptorSet& descriptors, int k,
                                std::uint64_t seed);

// Average cluster distortion: the distance sum divided by the component
// count (not the sample count).
double distortion_J(const ClusteringResult& result, int k);

// argmin over K of J(S,K) + sqrt(K), evaluated for K = 1..min(k_max, |S|)
// with per-K seeds (seed xor K); ties break toward the smaller K.
int select_component_count(const DescriptorSet& descriptors, int k_max,
                           std::uint64_t seed);

// K_max rule: max(5, ceil(0.1 * track_length)).
int component_count_cap(int track_length);

AppearanceMixture fit_mixture(const DescriptorSet& descriptors,
                              FeatureChannelId channel, int track_length,
                              std::uint64_t seed);

// Per-channel RNG stream for one (seed, track, channel) unit.
std::uint64_t signature_stream_seed(std::uint64_t seed,
                                    const std::string& track_id,
                                    FeatureChannelId channel);

McamSignature build_signature(const PersonTrack& track,
                              const std::vector<FeatureChannelId>& channels,
                              const RegionLayout& layout, std::uint64_t seed);

}  // namespace mcam
