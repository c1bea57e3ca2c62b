#include "mcam/mixture.hpp"

#include "mcam/errors.hpp"
#include "mcam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcam {

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int nearest_centroid(const std::vector<double>& point,
                     const std::vector<std::vector<double>>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
    const double d = sq_distance(point, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<std::vector<double>> seed_centroids(const DescriptorSet& s, int k,
                                                RngStream& rng) {
  const std::size_t n = s.size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(s[rng.uniform_index(n)]);

  std::vector<double> d2(n);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_distance(s[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        running += d2[i];
        if (running > target) {
          pick = i;
          break;
        }
      }
    } else {
      // All points coincide with chosen centers; any pick is equivalent.
      pick = rng.uniform_index(n);
    }
    centroids.push_back(s[pick]);
  }
  return centroids;
}

void update_centroids(const DescriptorSet& s, std::vector<int>& assignment,
                      std::vector<std::vector<double>>& centroids) {
  const int k = static_cast<int>(centroids.size());
  const std::size_t dim = s[0].size();
  std::vector<int> counts(k, 0);
  std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int c = assignment[i];
    ++counts[c];
    for (std::size_t d = 0; d < dim; ++d) sums[c][d] += s[i][d];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      centroids[c][d] = sums[c][d] / counts[c];
    }
  }

  // Re-seed each empty cluster to the point farthest from its own centroid,
  // restricted to clusters that can spare a member.
  for (int c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    double best_d = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (counts[assignment[i]] < 2) continue;
      const double d = sq_distance(s[i], centroids[assignment[i]]);
      if (d > best_d) {
        best_d = d;
        best_i = i;
      }
    }
    if (best_d < 0.0) continue;  // cannot happen while k <= |s|
    --counts[assignment[best_i]];
    assignment[best_i] = c;
    counts[c] = 1;
    centroids[c] = s[best_i];
  }
}

}  // namespace

const AppearanceMixture& McamSignature::mixture(FeatureChannelId channel) const {
  for (const auto& m : mixtures) {
    if (m.channel == channel) return m;
  }
  throw Error(ErrorCode::ChannelMismatch,
              std::string("signature '") + track_id + "' has no " +
                  channel_name(channel) + " mixture");
}

bool McamSignature::has_channel(FeatureChannelId channel) const {
  for (const auto& m : mixtures) {
    if (m.channel == channel) return true;
  }
  return false;
}

ClusteringResult kmeans_cluster(const DescriptorSet& descriptors, int k,
                                std::uint64_t seed) {
  const std::size_t n = descriptors.size();
  if (n == 0) throw Error(ErrorCode::EmptySet, "no descriptors to cluster");
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorCode::KExceedsSamples,
                "k=" + std::to_string(k) + " exceeds sample count " +
                    std::to_string(n));
  }

  RngStream rng(seed);
  ClusteringResult result;
  result.centroids = seed_centroids(descriptors, k, rng);
  result.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.assignment[i] = nearest_centroid(descriptors[i], result.centroids);
  }

  constexpr int kMaxIterations = 10;
  for (int it = 0; it < kMaxIterations; ++it) {
    update_centroids(descriptors, result.assignment, result.centroids);
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest_centroid(descriptors[i], result.centroids);
      if (c != result.assignment[i]) {
        result.assignment[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
  }

  result.distortion_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    result.distortion_sum += std::sqrt(
        sq_distance(descriptors[i], result.centroids[result.assignment[i]]));
  }
  return result;
}

double distortion_J(const ClusteringResult& result, int k) {
  return result.distortion_sum / static_cast<double>(k);
}

int select_component_count(const DescriptorSet& descriptors, int k_max,
                           std::uint64_t seed) {
  if (descriptors.empty()) {
    throw Error(ErrorCode::EmptySet, "no descriptors for model selection");
  }
  const int upper =
      std::min<int>(k_max, static_cast<int>(descriptors.size()));
  int best_k = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= upper; ++k) {
    const ClusteringResult res =
        kmeans_cluster(descriptors, k, seed ^ static_cast<std::uint64_t>(k));
    const double objective = distortion_J(res, k) + std::sqrt(k);
    if (objective < best) {
      best = objective;
      best_k = k;
    }
  }
  return best_k;
}

int component_count_cap(int track_length) {
  return std::max(5, static_cast<int>(std::ceil(0.1 * track_length)));
}

AppearanceMixture fit_mixture(const DescriptorSet& descriptors,
                              FeatureChannelId channel, int track_length,
                              std::uint64_t seed) {
  if (descriptors.empty()) {
    throw Error(ErrorCode::EmptySet, "cannot fit a mixture on an empty set");
  }
  if (static_cast<int>(descriptors.size()) != track_length) {
    throw Error(ErrorCode::DimMismatch,
                "descriptor count does not match track length");
  }

  const int k_max = std::min<int>(component_count_cap(track_length),
                                  static_cast<int>(descriptors.size()));
  const int k = select_component_count(descriptors, k_max, seed);
  const ClusteringResult clustering =
      kmeans_cluster(descriptors, k, seed ^ static_cast<std::uint64_t>(k));

  const std::size_t dim = descriptors[0].size();
  AppearanceMixture mixture;
  mixture.channel = channel;
  mixture.components.resize(k);

  std::vector<int> counts(k, 0);
  for (int a : clustering.assignment) ++counts[a];

  for (int c = 0; c < k; ++c) {
    GaussianComponent& comp = mixture.components[c];
    comp.prior = static_cast<double>(counts[c]) / track_length;
    comp.mean = clustering.centroids[c];
    comp.var.assign(dim, 0.0);
  }
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    GaussianComponent& comp = mixture.components[clustering.assignment[i]];
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = descriptors[i][d] - comp.mean[d];
      comp.var[d] += diff * diff;
    }
  }
  for (int c = 0; c < k; ++c) {
    GaussianComponent& comp = mixture.components[c];
    for (std::size_t d = 0; d < dim; ++d) {
      // Population variance, floored; singletons land on the floor.
      comp.var[d] = std::max(comp.var[d] / counts[c], kVarianceFloor);
    }
  }

  // Canonical component order: descending prior, then lexicographic mean.
  std::sort(mixture.components.begin(), mixture.components.end(),
            [](const GaussianComponent& a, const GaussianComponent& b) {
              if (a.prior != b.prior) return a.prior > b.prior;
              return a.mean < b.mean;
            });
  return mixture;
}

std::uint64_t signature_stream_seed(std::uint64_t seed,
                                    const std::string& track_id,
                                    FeatureChannelId channel) {
  return seed_combine(seed_combine(seed, track_id), channel_name(channel));
}

McamSignature build_signature(const PersonTrack& track,
                              const std::vector<FeatureChannelId>& channels,
                              const RegionLayout& layout, std::uint64_t seed) {
  if (track.frames.empty()) {
    throw Error(ErrorCode::EmptySet,
                "track '" + track.track_id + "' has no frames");
  }

  std::vector<NormalizedFrame> frames;
  frames.reserve(track.frames.size());
  for (const Image& raw : track.frames) {
    frames.push_back(preprocess_frame(raw, layout));
  }

  McamSignature signature;
  signature.track_id = track.track_id;
  signature.camera_id = track.camera_id;
  signature.n_frames = track.length();

  for (FeatureChannelId channel : channels) {
    DescriptorSet descriptors;
    descriptors.reserve(frames.size());
    for (const NormalizedFrame& frame : frames) {
      descriptors.push_back(extract_descriptor(frame, channel, layout).values);
    }
    signature.mixtures.push_back(
        fit_mixture(descriptors, channel, track.length(),
                    signature_stream_seed(seed, track.track_id, channel)));
  }
  return signature;
}

}  // namespace mcam
