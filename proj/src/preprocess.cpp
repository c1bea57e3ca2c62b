#include "mcam/preprocess.hpp"

#include "mcam/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mcam {

namespace {

constexpr double kLabRange = 100.0;
constexpr int kEqualizeBins = 256;

// D65 reference white.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.00000;
constexpr double kZn = 1.08883;

double srgb_linearize(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double srgb_delinearize(double c) {
  return c <= 0.0031308 ? 12.92 * c
                        : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
  constexpr double kCube = 216.0 / 24389.0;  // (6/29)^3
  constexpr double kSlope = 841.0 / 108.0;   // 1 / (3 (6/29)^2)
  return t > kCube ? std::cbrt(t) : kSlope * t + 4.0 / 29.0;
}

double lab_f_inv(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

}  // namespace

void srgb_to_lab(double r, double g, double b, double& L, double& a,
                 double& bb) {
  const double rl = srgb_linearize(r);
  const double gl = srgb_linearize(g);
  const double bl = srgb_linearize(b);

  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;

  const double fx = lab_f(x / kXn);
  const double fy = lab_f(y / kYn);
  const double fz = lab_f(z / kZn);

  L = 116.0 * fy - 16.0;
  a = 500.0 * (fx - fy);
  bb = 200.0 * (fy - fz);
}

void lab_to_srgb(double L, double a, double b, double& r, double& g,
                 double& bb) {
  const double fy = (L + 16.0) / 116.0;
  const double fx = fy + a / 500.0;
  const double fz = fy - b / 200.0;

  const double x = kXn * lab_f_inv(fx);
  const double y = kYn * lab_f_inv(fy);
  const double z = kZn * lab_f_inv(fz);

  const double rl = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
  const double gl = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
  const double bl = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;

  r = std::clamp(srgb_delinearize(std::clamp(rl, 0.0, 1.0)), 0.0, 1.0);
  g = std::clamp(srgb_delinearize(std::clamp(gl, 0.0, 1.0)), 0.0, 1.0);
  bb = std::clamp(srgb_delinearize(std::clamp(bl, 0.0, 1.0)), 0.0, 1.0);
}

Image make_image(int width, int height, double r, double g, double b) {
  Image img;
  img.width = width;
  img.height = height;
  img.data.resize(static_cast<std::size_t>(3) * width * height);
  for (std::size_t i = 0; i + 2 < img.data.size(); i += 3) {
    img.data[i] = r;
    img.data[i + 1] = g;
    img.data[i + 2] = b;
  }
  return img;
}

Image resize_bilinear(const Image& src, int out_w, int out_h) {
  if (src.empty()) {
    throw Error(ErrorCode::EmptyImage, "cannot resize an empty image");
  }
  Image out;
  out.width = out_w;
  out.height = out_h;
  out.data.resize(static_cast<std::size_t>(3) * out_w * out_h);

  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;

  for (int y = 0; y < out_h; ++y) {
    const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
    const int y0 = std::min(static_cast<int>(fy), src.height - 1);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
      const int x0 = std::min(static_cast<int>(fx), src.width - 1);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;

      const double* p00 = src.pixel(x0, y0);
      const double* p10 = src.pixel(x1, y0);
      const double* p01 = src.pixel(x0, y1);
      const double* p11 = src.pixel(x1, y1);
      double* dst = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = p00[c] + (p10[c] - p00[c]) * wx;
        const double bot = p01[c] + (p11[c] - p01[c]) * wx;
        dst[c] = top + (bot - top) * wy;
      }
    }
  }
  return out;
}

void equalize_histogram(std::vector<double>& values, double lo, double hi) {
  if (values.empty() || hi <= lo) return;

  const double range = hi - lo;
  std::array<std::size_t, kEqualizeBins> hist{};
  auto quantize = [&](double v) {
    const double t = (v - lo) / range * (kEqualizeBins - 1);
    return std::clamp(static_cast<int>(std::lround(t)), 0, kEqualizeBins - 1);
  };
  for (double v : values) ++hist[quantize(v)];

  std::array<double, kEqualizeBins> cdf{};
  std::size_t running = 0;
  for (int i = 0; i < kEqualizeBins; ++i) {
    running += hist[i];
    cdf[i] = static_cast<double>(running) / static_cast<double>(values.size());
  }
  for (double& v : values) v = lo + cdf[quantize(v)] * range;
}

NormalizedFrame preprocess_frame(const Image& raw, const RegionLayout& layout) {
  if (raw.empty()) {
    throw Error(ErrorCode::EmptyImage, "frame has zero pixels");
  }
  if (layout.window_w <= 0 || layout.window_h <= 0) {
    throw Error(ErrorCode::InvalidLayout, "layout window must be positive");
  }

  const Image scaled = (raw.width == layout.window_w &&
                        raw.height == layout.window_h)
                           ? raw
                           : resize_bilinear(raw, layout.window_w,
                                             layout.window_h);

  NormalizedFrame frame;
  frame.width = scaled.width;
  frame.height = scaled.height;
  const std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;
  frame.lab.resize(3 * n);
  frame.rgb.resize(3 * n);

  std::vector<double> lightness(n);
  for (std::size_t i = 0; i < n; ++i) {
    double L, a, b;
    srgb_to_lab(scaled.data[3 * i], scaled.data[3 * i + 1],
                scaled.data[3 * i + 2], L, a, b);
    lightness[i] = L;
    frame.lab[3 * i + 1] = a;
    frame.lab[3 * i + 2] = b;
  }

  equalize_histogram(lightness, 0.0, kLabRange);

  for (std::size_t i = 0; i < n; ++i) {
    frame.lab[3 * i] = lightness[i];
    lab_to_srgb(lightness[i], frame.lab[3 * i + 1], frame.lab[3 * i + 2],
                frame.rgb[3 * i], frame.rgb[3 * i + 1], frame.rgb[3 * i + 2]);
  }
  return frame;
}

}  // namespace mcam
