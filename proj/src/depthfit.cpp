#include "poseloop/depthfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "poseloop/error.hpp"

namespace poseloop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(Errc::kInvalidArgument, "raster dimensions must be positive");
  }
}

double median_inplace(std::vector<double>& v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), mid));
  }
  return m;
}

struct Samples {
  std::vector<double> pred;
  std::vector<double> real;
};

AffineDepthFit solve(const Samples& s) {
  const std::size_t n = s.pred.size();
  if (n < 2) {
    throw Error(Errc::kInsufficientPixels,
                "need at least 2 usable pixels, have " + std::to_string(n));
  }
  if (std::all_of(s.pred.begin(), s.pred.end(), [&](double p) { return p == s.pred.front(); })) {
    throw Error(Errc::kDegeneratePred, "predicted depth is constant over the mask");
  }
  // Normal equations of the 2x2 system, written in centered form.
  double mean_p = 0.0;
  double mean_r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_p += s.pred[i];
    mean_r += s.real[i];
  }
  mean_p /= static_cast<double>(n);
  mean_r /= static_cast<double>(n);
  double spp = 0.0;
  double spr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = s.pred[i] - mean_p;
    spp += dp * dp;
    spr += dp * (s.real[i] - mean_r);
  }
  if (!(spp > 1e-20 * static_cast<double>(n) * std::max(1.0, mean_p * mean_p))) {
    throw Error(Errc::kDegeneratePred, "normal matrix is singular");
  }
  AffineDepthFit fit;
  fit.scale = spr / spp;
  fit.shift = mean_r - fit.scale * mean_p;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = fit.scale * s.pred[i] + fit.shift - s.real[i];
    sse += r * r;
  }
  fit.rmse = std::sqrt(sse / static_cast<double>(n));
  fit.pixel_count = n;
  return fit;
}

}  // namespace

DepthMap::DepthMap(int width, int height) : DepthMap(width, height, kNaN) {}

DepthMap::DepthMap(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  if (std::isfinite(fill) && fill <= 0.0) {
    throw Error(Errc::kInvalidDepth, "depth values must be positive");
  }
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

DepthMap::DepthMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(Errc::kDimensionMismatch, "value count does not match width*height");
  }
  for (double& v : values_) {
    if (std::isnan(v)) {
      v = kNaN;
    } else if (!std::isfinite(v) || v <= 0.0) {
      throw Error(Errc::kInvalidDepth, "depth values must be positive and finite or NaN");
    }
  }
}

bool DepthMap::valid(int x, int y) const { return std::isfinite(at(x, y)); }

Mask::Mask(int width, int height, bool fill) : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill ? 1 : 0);
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask dilate(const Mask& mask, int radius_px) {
  if (radius_px < 0) throw Error(Errc::kInvalidArgument, "dilation radius must be >= 0");
  if (radius_px == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> half_width(static_cast<std::size_t>(radius_px) + 1);
  for (int dy = 0; dy <= radius_px; ++dy) {
    half_width[static_cast<std::size_t>(dy)] =
        static_cast<int>(std::floor(std::sqrt(static_cast<double>(radius_px * radius_px - dy * dy))));
  }
  // Per-row difference arrays: each set pixel stamps one horizontal run per row.
  std::vector<int> diff(static_cast<std::size_t>(h) * static_cast<std::size_t>(w + 1), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      for (int dy = -radius_px; dy <= radius_px; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        const int hw = half_width[static_cast<std::size_t>(std::abs(dy))];
        const int x0 = std::max(0, x - hw);
        const int x1 = std::min(w - 1, x + hw);
        const std::size_t row = static_cast<std::size_t>(yy) * static_cast<std::size_t>(w + 1);
        ++diff[row + static_cast<std::size_t>(x0)];
        --diff[row + static_cast<std::size_t>(x1) + 1];
      }
    }
  }
  Mask out(w, h);
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * static_cast<std::size_t>(w + 1);
    int run = 0;
    for (int x = 0; x < w; ++x) {
      run += diff[row + static_cast<std::size_t>(x)];
      if (run > 0) out.set(x, y);
    }
  }
  return out;
}

AffineDepthFit fit_scale_shift(const DepthMap& pred, const DepthMap& real, const Mask& mask,
                               const DepthFitOptions& options) {
  if (pred.width() != real.width() || pred.height() != real.height() ||
      mask.width() != pred.width() || mask.height() != pred.height()) {
    throw Error(Errc::kDimensionMismatch, "depth maps and mask must share dimensions");
  }
  const Mask region = dilate(mask, options.dilation_px);
  Samples samples;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!region.at(x, y) || !pred.valid(x, y) || !real.valid(x, y)) continue;
      samples.pred.push_back(pred.at(x, y));
      samples.real.push_back(real.at(x, y));
    }
  }
  AffineDepthFit fit = solve(samples);
  if (!options.trimmed) return fit;

  std::vector<double> residuals(samples.pred.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    residuals[i] = fit.scale * samples.pred[i] + fit.shift - samples.real[i];
  }
  std::vector<double> scratch = residuals;
  const double med = median_inplace(scratch);
  for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] = std::abs(residuals[i] - med);
  const double mad = median_inplace(scratch);
  if (mad == 0.0) return fit;

  Samples kept;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (std::abs(residuals[i] - med) <= options.mad_factor * mad) {
      kept.pred.push_back(samples.pred[i]);
      kept.real.push_back(samples.real[i]);
    }
  }
  return solve(kept);
}

AffineApplyResult apply_affine(const DepthMap& depth, const AffineDepthFit& fit) {
  AffineApplyResult out{depth, 0};
  for (double& v : out.depth.values()) {
    if (!std::isfinite(v)) continue;
    v = fit.scale * v + fit.shift;
    if (!(v > 0.0)) {
      v = kNaN;
      ++out.clipped;
    }
  }
  return out;
}

double mean_masked_depth(const DepthMap& depth, const Mask& mask) {
  if (depth.width() != mask.width() || depth.height() != mask.height()) {
    throw Error(Errc::kDimensionMismatch, "depth map and mask must share dimensions");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (mask.at(x, y) && depth.valid(x, y)) {
        sum += depth.at(x, y);
        ++n;
      }
    }
  }
  if (n == 0) throw Error(Errc::kInsufficientPixels, "no valid depth under the mask");
  return sum / static_cast<double>(n);
}

FlickerProfile flicker_profile(std::span<const DepthMap> depths, std::span<const Mask> masks) {
  if (depths.size() != masks.size()) {
    throw Error(Errc::kLengthMismatch, "depth and mask sequences differ in length");
  }
  if (depths.size() < 2) throw Error(Errc::kTooFewFrames, "flicker needs at least 2 frames");
  FlickerProfile profile;
  profile.means.reserve(depths.size());
  for (std::size_t t = 0; t < depths.size(); ++t) {
    try {
      profile.means.push_back(mean_masked_depth(depths[t], masks[t]));
    } catch (const Error& e) {
      throw Error(e.code(), "frame " + std::to_string(t) + ": " + e.what(), t);
    }
  }
  for (std::size_t t = 0; t + 1 < profile.means.size(); ++t) {
    const double d = std::abs(profile.means[t + 1] - profile.means[t]);
    profile.deltas.push_back(d);
    if (d > profile.max_delta) {
      profile.max_delta = d;
      profile.max_index = t;
    }
  }
  return profile;
}

}  // namespace poseloop
