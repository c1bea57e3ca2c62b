#pragma once

#include "mcam/preprocess.hpp"
#include "mcam/region.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mcam {

enum class FeatureChannelId { Csh, Hog, Bcov };

inline constexpr FeatureChannelId kAllChannels[] = {
    FeatureChannelId::Csh, FeatureChannelId::Hog, FeatureChannelId::Bcov};

const char* channel_name(FeatureChannelId channel);
FeatureChannelId channel_from_name(std::string_view name);

inline constexpr int kCshBins = 30;
inline constexpr int kHogBins = 8;
inline constexpr int kBcovChannels = 11;
inline constexpr int kBcovDimPerRegion = kBcovChannels * (kBcovChannels + 1) / 2;

// Fixed value ranges used for CSH binning. L is the Lab lightness range; a and
// b use a symmetric range that covers the sRGB gamut.
inline constexpr double kLabLRange[2] = {0.0, 100.0};
inline constexpr double kLabAbRange[2] = {-128.0, 128.0};

int descriptor_dim(FeatureChannelId channel, const RegionLayout& layout);

struct FeatureDescriptor {
  FeatureChannelId channel = FeatureChannelId::Csh;
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
};

// Per-region 30-bin Lab histograms (L, a, b), each L1-normalized by region
// pixel count, concatenated region-major.
FeatureDescriptor extract_csh(const NormalizedFrame& frame,
                              const RegionLayout& layout);

// Per-region 8-bin signed-orientation gradient histograms over equalized
// lightness, magnitude-weighted with hard binning, L1-normalized (all-zero
// regions stay all-zero).
FeatureDescriptor extract_hog(const NormalizedFrame& frame,
                              const RegionLayout& layout);

// Per-region 11x11 Brownian (distance) covariance over
// [R,G,B, |grad| and orientation per RGB channel, x, y], diagonal-loaded,
// mapped to the tangent space at identity by matrix log and vectorized
// (upper triangle, off-diagonals scaled by sqrt(2)).
FeatureDescriptor extract_bcov(const NormalizedFrame& frame,
                               const RegionLayout& layout);

FeatureDescriptor extract_descriptor(const NormalizedFrame& frame,
                                     FeatureChannelId channel,
                                     const RegionLayout& layout);

std::vector<FeatureChannelId> parse_channel_list(std::string_view csv);
std::string channel_list_to_string(const std::vector<FeatureChannelId>& list);

}  // namespace mcam
