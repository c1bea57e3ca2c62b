#pragma once

#include "mcam/image.hpp"
#include "mcam/region.hpp"

namespace mcam {

// A person patch scaled to the layout window, carrying both the Lab view
// (L equalized) and an RGB view regenerated from the equalized Lab so that
// every extractor sees the same illumination-normalized pixels.
struct NormalizedFrame {
  int width = 0;
  int height = 0;
  std::vector<double> lab;  // 3 per pixel: L in [0,100], a,b roughly [-128,128]
  std::vector<double> rgb;  // 3 per pixel in [0,1]

  const double* lab_pixel(int x, int y) const {
    return lab.data() + 3 * (y * width + x);
  }
  const double* rgb_pixel(int x, int y) const {
    return rgb.data() + 3 * (y * width + x);
  }
};

// sRGB (D65) <-> CIE Lab. Inputs/outputs are real-valued, not quantized.
void srgb_to_lab(double r, double g, double b, double& L, double& a,
                 double& bb);
void lab_to_srgb(double L, double a, double b, double& r, double& g,
                 double& bb);

Image resize_bilinear(const Image& src, int out_w, int out_h);

// 256-bin CDF equalization over values in [lo, hi], in place. Values are
// quantized to bins for the histogram; outputs are real (cdf * range).
void equalize_histogram(std::vector<double>& values, double lo, double hi);

NormalizedFrame preprocess_frame(const Image& raw, const RegionLayout& layout);

}  // namespace mcam
