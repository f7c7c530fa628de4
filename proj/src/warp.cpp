// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/warp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rigidflow/parallel.hpp"

namespace rigidflow {
namespace {

// Bilinear tap layout for a sample point inside [0, W-1] x [0, H-1].
// The base corner is clamped so that a sample exactly on the last row or
// column still resolves (with the far taps carrying all the weight).
struct Taps {
  int x0, x1, y0, y1;
  double wx, wy;  // weight of the x1 / y1 taps
};

inline bool make_taps(double sx, double sy, int h, int w, Taps* t) {
  if (!(sx >= 0.0) || !(sx <= w - 1.0) || !(sy >= 0.0) || !(sy <= h - 1.0)) {
    return false;
  }
  t->x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, std::max(w - 2, 0));
  t->y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, std::max(h - 2, 0));
  t->x1 = std::min(t->x0 + 1, w - 1);
  t->y1 = std::min(t->y0 + 1, h - 1);
  t->wx = sx - t->x0;
  t->wy = sy - t->y0;
  return true;
}

template <typename T>
inline T lerp_taps(const Grid<T>& g, const Taps& t) {
  const T top = (1.0 - t.wx) * g(t.y0, t.x0) + t.wx * g(t.y0, t.x1);
  const T bot = (1.0 - t.wx) * g(t.y1, t.x0) + t.wx * g(t.y1, t.x1);
  return (1.0 - t.wy) * top + t.wy * bot;
}

inline void sample_offset(const std::optional<CropWindow>& window, int h,
                          int w, int src_h, int src_w, double* ox,
                          double* oy) {
  *ox = 0.0;
  *oy = 0.0;
  if (window) {
    if (window->width != w || window->height != h) {
      throw InvalidInput("warp: window size does not match the flow grid");
    }
    window->require_inside(src_h, src_w);
    *ox = window->x0;
    *oy = window->y0;
  }
}

}  // namespace

WarpedImage warp_bilinear(const Image& source, const FlowField& flow,
                          const std::optional<CropWindow>& window) {
  const int h = flow.height();
  const int w = flow.width();
  const int sh = source.height();
  const int sw = source.width();
  double ox, oy;
  sample_offset(window, h, w, sh, sw, &ox, &oy);
  if (!window) require_same_shape(h, w, sh, sw, "flow vs source image");

  WarpedImage out{Image(h, w, Eigen::Vector3d::Zero()), BinaryMask(h, w, 0)};
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (!flow.valid(y, x)) continue;
      const Eigen::Vector2d& f = flow.values(y, x);
      Taps t;
      if (!make_taps(x + ox + f.x(), y + oy + f.y(), sh, sw, &t)) continue;
      out.values(y, x) = lerp_taps(source, t);
      out.valid(y, x) = 1;
    }
  });
  return out;
}

WarpedScalar warp_bilinear(const DepthMap& source, const FlowField& flow,
                           const std::optional<CropWindow>& window) {
  const int h = flow.height();
  const int w = flow.width();
  const int sh = source.height();
  const int sw = source.width();
  double ox, oy;
  sample_offset(window, h, w, sh, sw, &ox, &oy);
  if (!window) require_same_shape(h, w, sh, sw, "flow vs source depth");

  WarpedScalar out{Grid<double>(h, w, 0.0), BinaryMask(h, w, 0)};
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (!flow.valid(y, x)) continue;
      const Eigen::Vector2d& f = flow.values(y, x);
      Taps t;
      if (!make_taps(x + ox + f.x(), y + oy + f.y(), sh, sw, &t)) continue;
      if (!source.valid(t.y0, t.x0) || !source.valid(t.y0, t.x1) ||
          !source.valid(t.y1, t.x0) || !source.valid(t.y1, t.x1)) {
        continue;
      }
      out.values(y, x) = lerp_taps(source.values, t);
      out.valid(y, x) = 1;
    }
  });
  return out;
}

Grid<double> ssim(const Image& ia, const Image& ib) {
  const int h = ia.height();
  const int w = ia.width();
  require_same_shape(h, w, ib.height(), ib.width(), "ssim inputs");

  Grid<double> out(h, w, 0.0);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int c = 0; c < 3; ++c) {
        // 3x3 box statistics with replicate padding (index clamping).
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = std::clamp(y + dy, 0, h - 1);
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = std::clamp(x + dx, 0, w - 1);
            const double a = ia(yy, xx)[c];
            const double b = ib(yy, xx)[c];
            sa += a;
            sb += b;
            saa += a * a;
            sbb += b * b;
            sab += a * b;
          }
        }
        const double mu_a = sa / 9.0;
        const double mu_b = sb / 9.0;
        const double var_a = saa / 9.0 - mu_a * mu_a;
        const double var_b = sbb / 9.0 - mu_b * mu_b;
        const double cov = sab / 9.0 - mu_a * mu_b;
        const double num =
            (2.0 * mu_a * mu_b + kSsimC1) * (2.0 * cov + kSsimC2);
        const double den =
            (mu_a * mu_a + mu_b * mu_b + kSsimC1) * (var_a + var_b + kSsimC2);
        acc += num / den;
      }
      out(y, x) = acc / 3.0;
    }
  });
  return out;
}

Grid<double> photometric_error(const Image& ia, const Image& ib,
                               double alpha) {
  if (!(alpha >= 0.0) || !(alpha <= 1.0)) {
    throw InvalidInput("photometric_error: alpha must be in [0,1]");
  }
  const int h = ia.height();
  const int w = ia.width();
  require_same_shape(h, w, ib.height(), ib.width(), "photometric inputs");

  const Grid<double> s = ssim(ia, ib);
  Grid<double> out(h, w, 0.0);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double l1 = (ia(y, x) - ib(y, x)).cwiseAbs().mean();
      // ssim can exceed 1 by rounding noise; the error must stay >= 0.
      out(y, x) =
          std::max(0.0, 0.5 * alpha * (1.0 - s(y, x)) + (1.0 - alpha) * l1);
    }
  });
  return out;
}

BinaryMask occlusion_mask(const FlowField& f12, const FlowField& f21) {
  const int h = f12.height();
  const int w = f12.width();
  require_same_shape(h, w, f21.height(), f21.width(), "flow pair");

  BinaryMask noc(h, w, 0);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (!f12.valid(y, x)) continue;
      const Eigen::Vector2d& fwd = f12.values(y, x);
      Taps t;
      if (!make_taps(x + fwd.x(), y + fwd.y(), h, w, &t)) continue;
      if (!f21.valid(t.y0, t.x0) || !f21.valid(t.y0, t.x1) ||
          !f21.valid(t.y1, t.x0) || !f21.valid(t.y1, t.x1)) {
        continue;
      }
      const Eigen::Vector2d back = lerp_taps(f21.values, t);
      const double mismatch = (fwd + back).squaredNorm();
      const double bound =
          kFbA1 * (fwd.squaredNorm() + back.squaredNorm()) + kFbA2;
      if (mismatch < bound) noc(y, x) = 1;
    }
  });
  return noc;
}

OutlierMaskResult outlier_mask(const Grid<double>& pe_map,
                               const BinaryMask& valid, double p_lo,
                               double p_hi) {
  const int h = pe_map.height();
  const int w = pe_map.width();
  require_same_shape(h, w, valid.height(), valid.width(), "pe map vs mask");
  if (!(p_lo >= 0.0) || !(p_hi <= 1.0) || !(p_lo <= p_hi)) {
    throw InvalidInput("outlier_mask: need 0 <= p_lo <= p_hi <= 1");
  }

  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!valid(y, x)) continue;
      const double v = pe_map(y, x);
      if (!is_finite(v) || v < 0.0) {
        throw InvalidInput("outlier_mask: photometric error must be >= 0");
      }
      vals.push_back(v);
    }
  }

  OutlierMaskResult res{BinaryMask(h, w, 0), false};
  const auto n = static_cast<std::ptrdiff_t>(vals.size());
  if (n < kOutlierMinSupport) {
    res.low_support = true;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) res.mask(y, x) = valid(y, x) ? 1 : 0;
    }
    return res;
  }

  std::sort(vals.begin(), vals.end());
  const auto rank = [n](double p) {
    return std::min(static_cast<std::ptrdiff_t>(std::floor(p * n)), n - 1);
  };
  const double q_lo = vals[rank(p_lo)];
  const double q_hi = vals[rank(p_hi)];
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (!valid(y, x)) continue;
      const double v = pe_map(y, x);
      res.mask(y, x) = (v >= q_lo && v <= q_hi) ? 1 : 0;
    }
  });
  return res;
}

}  // namespace rigidflow
