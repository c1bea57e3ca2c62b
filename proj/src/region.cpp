#include "mcam/region.hpp"

#include "mcam/errors.hpp"

#include <string>

namespace mcam {

RegionLayout build_region_layout(int window_w, int window_h, int region_w,
                                 int region_h, int stride) {
  if (window_w <= 0 || window_h <= 0 || region_w <= 0 || region_h <= 0 ||
      stride <= 0) {
    throw Error(ErrorCode::InvalidLayout,
                "layout dimensions and stride must be positive");
  }
  if (region_w > window_w || region_h > window_h) {
    throw Error(ErrorCode::InvalidLayout,
                "region " + std::to_string(region_w) + "x" +
                    std::to_string(region_h) + " exceeds window " +
                    std::to_string(window_w) + "x" +
                    std::to_string(window_h));
  }

  RegionLayout layout;
  layout.window_w = window_w;
  layout.window_h = window_h;
  layout.region_w = region_w;
  layout.region_h = region_h;
  layout.stride = stride;

  for (int y = 0; y + region_h <= window_h; y += stride) {
    for (int x = 0; x + region_w <= window_w; x += stride) {
      layout.regions.push_back({x, y, region_w, region_h});
    }
  }
  return layout;
}

}  // namespace mcam
