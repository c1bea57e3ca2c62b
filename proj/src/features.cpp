#include "mcam/features.hpp"

#include "mcam/dcov.hpp"
#include "mcam/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace mcam {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_layout(const NormalizedFrame& frame, const RegionLayout& layout) {
  if (frame.width != layout.window_w || frame.height != layout.window_h) {
    throw Error(ErrorCode::LayoutMismatch,
                "frame " + std::to_string(frame.width) + "x" +
                    std::to_string(frame.height) + " does not match layout " +
                    std::to_string(layout.window_w) + "x" +
                    std::to_string(layout.window_h));
  }
}

// Central differences with clamped borders over a scalar plane.
void central_differences(const std::vector<double>& plane, int w, int h,
                         std::vector<double>& gx, std::vector<double>& gy) {
  gx.resize(plane.size());
  gy.resize(plane.size());
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0);
    const int yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0);
      const int xp = std::min(x + 1, w - 1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = (plane[static_cast<std::size_t>(y) * w + xp] -
               plane[static_cast<std::size_t>(y) * w + xm]) /
              2.0;
      gy[i] = (plane[static_cast<std::size_t>(yp) * w + x] -
               plane[static_cast<std::size_t>(ym) * w + x]) /
              2.0;
    }
  }
}

double signed_orientation(double gx, double gy) {
  double theta = std::atan2(gy, gx);
  if (theta < 0.0) theta += kTwoPi;
  if (theta >= kTwoPi) theta = 0.0;
  return theta;
}

std::vector<double> extract_plane(const std::vector<double>& interleaved,
                                  std::size_t n, int channel) {
  std::vector<double> plane(n);
  for (std::size_t i = 0; i < n; ++i) plane[i] = interleaved[3 * i + channel];
  return plane;
}

}  // namespace

const char* channel_name(FeatureChannelId channel) {
  switch (channel) {
    case FeatureChannelId::Csh:
      return "CSH";
    case FeatureChannelId::Hog:
      return "HOG";
    case FeatureChannelId::Bcov:
      return "BCOV";
  }
  return "?";
}

FeatureChannelId channel_from_name(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "CSH") return FeatureChannelId::Csh;
  if (upper == "HOG") return FeatureChannelId::Hog;
  if (upper == "BCOV") return FeatureChannelId::Bcov;
  throw Error(ErrorCode::UnknownChannel,
              "unknown feature channel '" + std::string(name) + "'");
}

int descriptor_dim(FeatureChannelId channel, const RegionLayout& layout) {
  switch (channel) {
    case FeatureChannelId::Csh:
      return layout.count() * 3 * kCshBins;
    case FeatureChannelId::Hog:
      return layout.count() * kHogBins;
    case FeatureChannelId::Bcov:
      return layout.count() * kBcovDimPerRegion;
  }
  throw Error(ErrorCode::UnknownChannel, "unknown feature channel");
}

FeatureDescriptor extract_csh(const NormalizedFrame& frame,
                              const RegionLayout& layout) {
  check_layout(frame, layout);

  FeatureDescriptor desc;
  desc.channel = FeatureChannelId::Csh;
  desc.values.assign(static_cast<std::size_t>(descriptor_dim(
                         FeatureChannelId::Csh, layout)),
                     0.0);

  const double ranges[3][2] = {{kLabLRange[0], kLabLRange[1]},
                               {kLabAbRange[0], kLabAbRange[1]},
                               {kLabAbRange[0], kLabAbRange[1]}};

  std::size_t offset = 0;
  for (const Region& r : layout.regions) {
    double* hist = desc.values.data() + offset;
    for (int y = r.y; y < r.y + r.h; ++y) {
      for (int x = r.x; x < r.x + r.w; ++x) {
        const double* lab = frame.lab_pixel(x, y);
        for (int c = 0; c < 3; ++c) {
          const double lo = ranges[c][0];
          const double hi = ranges[c][1];
          const double t = (lab[c] - lo) / (hi - lo) * kCshBins;
          const int bin = std::clamp(static_cast<int>(t), 0, kCshBins - 1);
          hist[c * kCshBins + bin] += 1.0;
        }
      }
    }
    const double count = static_cast<double>(r.w) * r.h;
    for (int i = 0; i < 3 * kCshBins; ++i) hist[i] /= count;
    offset += 3 * kCshBins;
  }
  return desc;
}

FeatureDescriptor extract_hog(const NormalizedFrame& frame,
                              const RegionLayout& layout) {
  check_layout(frame, layout);

  const std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;
  const std::vector<double> lum = extract_plane(frame.lab, n, 0);
  std::vector<double> gx, gy;
  central_differences(lum, frame.width, frame.height, gx, gy);

  FeatureDescriptor desc;
  desc.channel = FeatureChannelId::Hog;
  desc.values.assign(static_cast<std::size_t>(descriptor_dim(
                         FeatureChannelId::Hog, layout)),
                     0.0);

  std::size_t offset = 0;
  for (const Region& r : layout.regions) {
    double* hist = desc.values.data() + offset;
    for (int y = r.y; y < r.y + r.h; ++y) {
      for (int x = r.x; x < r.x + r.w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * frame.width + x;
        const double mag = std::hypot(gx[i], gy[i]);
        if (mag == 0.0) continue;
        const double theta = signed_orientation(gx[i], gy[i]);
        const int bin = std::min(static_cast<int>(theta / (kTwoPi / kHogBins)),
                                 kHogBins - 1);
        hist[bin] += mag;
      }
    }
    double sum = 0.0;
    for (int i = 0; i < kHogBins; ++i) sum += hist[i];
    if (sum > 0.0) {
      for (int i = 0; i < kHogBins; ++i) hist[i] /= sum;
    }
    offset += kHogBins;
  }
  return desc;
}

FeatureDescriptor extract_bcov(const NormalizedFrame& frame,
                               const RegionLayout& layout) {
  check_layout(frame, layout);

  const std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;

  // Frame-wide planes: RGB intensities plus per-channel gradient magnitude
  // and signed orientation.
  std::vector<double> planes[9];
  for (int c = 0; c < 3; ++c) {
    planes[c] = extract_plane(frame.rgb, n, c);
  }
  std::vector<double> gx, gy;
  for (int c = 0; c < 3; ++c) {
    central_differences(planes[c], frame.width, frame.height, gx, gy);
    auto& mag = planes[3 + 2 * c];
    auto& ori = planes[4 + 2 * c];
    mag.resize(n);
    ori.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      mag[i] = std::hypot(gx[i], gy[i]);
      ori[i] = signed_orientation(gx[i], gy[i]);
    }
  }

  FeatureDescriptor desc;
  desc.channel = FeatureChannelId::Bcov;
  desc.values.reserve(static_cast<std::size_t>(descriptor_dim(
      FeatureChannelId::Bcov, layout)));

  Eigen::MatrixXd channels(kBcovChannels, 0);
  for (const Region& r : layout.regions) {
    const int m = r.w * r.h;
    channels.resize(kBcovChannels, m);
    int col = 0;
    for (int y = r.y; y < r.y + r.h; ++y) {
      for (int x = r.x; x < r.x + r.w; ++x, ++col) {
        const std::size_t i = static_cast<std::size_t>(y) * frame.width + x;
        for (int p = 0; p < 9; ++p) channels(p, col) = planes[p][i];
        channels(9, col) =
            r.w > 1 ? static_cast<double>(x - r.x) / (r.w - 1) : 0.0;
        channels(10, col) =
            r.h > 1 ? static_cast<double>(y - r.y) / (r.h - 1) : 0.0;
      }
    }

    Eigen::MatrixXd dcov = distance_covariance_matrix(channels);
    const double eps = spd_loading(dcov);
    dcov.diagonal().array() += eps;
    const Eigen::MatrixXd tangent = spd_log(dcov);
    for (double v : symmetric_to_tangent_vector(tangent)) {
      desc.values.push_back(v);
    }
  }
  return desc;
}

FeatureDescriptor extract_descriptor(const NormalizedFrame& frame,
                                     FeatureChannelId channel,
                                     const RegionLayout& layout) {
  switch (channel) {
    case FeatureChannelId::Csh:
      return extract_csh(frame, layout);
    case FeatureChannelId::Hog:
      return extract_hog(frame, layout);
    case FeatureChannelId::Bcov:
      return extract_bcov(frame, layout);
  }
  throw Error(ErrorCode::UnknownChannel, "unknown feature channel");
}

std::vector<FeatureChannelId> parse_channel_list(std::string_view csv) {
  std::vector<FeatureChannelId> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view token = csv.substr(start, end - start);
    while (!token.empty() && std::isspace(static_cast<unsigned char>(
                                 token.front()))) {
      token.remove_prefix(1);
    }
    while (!token.empty() &&
           std::isspace(static_cast<unsigned char>(token.back()))) {
      token.remove_suffix(1);
    }
    if (!token.empty()) {
      const FeatureChannelId channel = channel_from_name(token);
      if (std::find(out.begin(), out.end(), channel) == out.end()) {
        out.push_back(channel);
      }
    }
    start = end + 1;
  }
  if (out.empty()) {
    throw Error(ErrorCode::UnknownChannel, "feature set must be nonempty");
  }
  return out;
}

std::string channel_list_to_string(const std::vector<FeatureChannelId>& list) {
  std::string out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) out += ',';
    out += channel_name(list[i]);
  }
  return out;
}

}  // namespace mcam
