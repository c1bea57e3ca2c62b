#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mcam {

// Interleaved RGB raster with real-valued channels in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // 3 * width * height, row-major, r,g,b per pixel

  bool empty() const { return width <= 0 || height <= 0 || data.empty(); }

  double* pixel(int x, int y) { return data.data() + 3 * (y * width + x); }
  const double* pixel(int x, int y) const {
    return data.data() + 3 * (y * width + x);
  }
};

Image make_image(int width, int height, double r = 0.0, double g = 0.0,
                 double b = 0.0);

// Ordered person-image patches sharing a camera/track identity.
struct PersonTrack {
  std::string track_id;
  std::string camera_id;
  std::optional<std::string> person_id;
  std::vector<Image> frames;

  int length() const { return static_cast<int>(frames.size()); }
};

}  // namespace mcam
