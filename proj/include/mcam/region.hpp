#pragma once

#include <vector>

namespace mcam {

struct Region {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

// Fixed overlapping region grid shared by all feature extractors. Regions are
// placed at multiples of the stride and ordered row-major (y outer, x inner).
struct RegionLayout {
  int window_w = 64;
  int window_h = 192;
  int region_w = 32;
  int region_h = 32;
  int stride = 16;
  std::vector<Region> regions;

  int count() const { return static_cast<int>(regions.size()); }
};

RegionLayout build_region_layout(int window_w, int window_h, int region_w,
                                 int region_h, int stride);

inline RegionLayout default_region_layout() {
  return build_region_layout(64, 192, 32, 32, 16);
}

}  // namespace mcam
