// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/visualize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rigidflow {
namespace {

// 55-entry direction color wheel (RY/YG/GC/CB/BM/MR segments), the de
// facto standard encoding for optical flow.
std::vector<Eigen::Vector3d> make_color_wheel() {
  const int ry = 15, yg = 6, gc = 4, cb = 11, bm = 13, mr = 6;
  std::vector<Eigen::Vector3d> wheel;
  wheel.reserve(ry + yg + gc + cb + bm + mr);
  for (int i = 0; i < ry; ++i) {
    wheel.emplace_back(1.0, static_cast<double>(i) / ry, 0.0);
  }
  for (int i = 0; i < yg; ++i) {
    wheel.emplace_back(1.0 - static_cast<double>(i) / yg, 1.0, 0.0);
  }
  for (int i = 0; i < gc; ++i) {
    wheel.emplace_back(0.0, 1.0, static_cast<double>(i) / gc);
  }
  for (int i = 0; i < cb; ++i) {
    wheel.emplace_back(0.0, 1.0 - static_cast<double>(i) / cb, 1.0);
  }
  for (int i = 0; i < bm; ++i) {
    wheel.emplace_back(static_cast<double>(i) / bm, 0.0, 1.0);
  }
  for (int i = 0; i < mr; ++i) {
    wheel.emplace_back(1.0, 0.0, 1.0 - static_cast<double>(i) / mr);
  }
  return wheel;
}

Eigen::Vector3d wheel_color(double u, double v) {
  static const std::vector<Eigen::Vector3d> wheel = make_color_wheel();
  const int n = static_cast<int>(wheel.size());
  const double rad = std::min(std::sqrt(u * u + v * v), 1.0);
  const double a = std::atan2(-v, -u) / M_PI;  // [-1, 1]
  const double fk = (a + 1.0) / 2.0 * (n - 1);
  const int k0 = std::min(static_cast<int>(std::floor(fk)), n - 1);
  const int k1 = (k0 + 1) % n;
  const double f = fk - k0;
  Eigen::Vector3d col = (1.0 - f) * wheel[k0] + f * wheel[k1];
  // Desaturate toward white as the magnitude drops.
  return Eigen::Vector3d::Ones() - rad * (Eigen::Vector3d::Ones() - col);
}

// Anchor points of the viridis colormap, linearly interpolated.
Eigen::Vector3d viridis(double t) {
  static const Eigen::Vector3d anchors[] = {
      {0.267004, 0.004874, 0.329415}, {0.282623, 0.140926, 0.457517},
      {0.253935, 0.265254, 0.529983}, {0.206756, 0.371758, 0.553117},
      {0.163625, 0.471133, 0.558148}, {0.127568, 0.566949, 0.550556},
      {0.134692, 0.658636, 0.517649}, {0.266941, 0.748751, 0.440573},
      {0.477504, 0.821444, 0.318195}, {0.741388, 0.873449, 0.149561},
      {0.993248, 0.906157, 0.143936}};
  const int n = static_cast<int>(std::size(anchors));
  const double s = std::clamp(t, 0.0, 1.0) * (n - 1);
  const int i = std::min(static_cast<int>(std::floor(s)), n - 2);
  const double f = s - i;
  return (1.0 - f) * anchors[i] + f * anchors[i + 1];
}

}  // namespace

Image visualize_flow(const FlowField& flow,
                     std::optional<double> max_magnitude) {
  const int h = flow.height();
  const int w = flow.width();
  double max_rad = 0.0;
  if (max_magnitude) {
    if (!(*max_magnitude > 0)) {
      throw InvalidInput("visualize_flow: max_magnitude must be > 0");
    }
    max_rad = *max_magnitude;
  } else {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (flow.valid(y, x)) {
          max_rad = std::max(max_rad, flow.values(y, x).norm());
        }
      }
    }
    if (max_rad == 0.0) max_rad = 1.0;  // all-zero flow renders white
  }
  Image out(h, w, Eigen::Vector3d::Zero());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!flow.valid(y, x)) continue;
      out(y, x) = wheel_color(flow.values(y, x).x() / max_rad,
                              flow.values(y, x).y() / max_rad);
    }
  }
  return out;
}

Image visualize_depth(const DepthMap& depth) {
  const int h = depth.values.height();
  const int w = depth.values.width();
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(y, x)) continue;
      const double d = depth.values(y, x);
      if (!any || d < lo) lo = d;
      if (!any || d > hi) hi = d;
      any = true;
    }
  }
  Image out(h, w, Eigen::Vector3d::Zero());
  if (!any) return out;
  const double span = hi > lo ? hi - lo : 1.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(y, x)) continue;
      // Near is bright, far is dark.
      out(y, x) = viridis(1.0 - (depth.values(y, x) - lo) / span);
    }
  }
  return out;
}

Image visualize_mask(const Grid<double>& mask) {
  Image out(mask.height(), mask.width(), Eigen::Vector3d::Zero());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const double v = std::clamp(mask(y, x), 0.0, 1.0);
      out(y, x) = Eigen::Vector3d(v, v, v);
    }
  }
  return out;
}

Image visualize_error(const Grid<double>& error, const BinaryMask& valid,
                      double threshold) {
  if (!(threshold > 0)) {
    throw InvalidInput("visualize_error: threshold must be > 0");
  }
  require_same_shape(error.height(), error.width(), valid.height(),
                     valid.width(), "error vs valid");
  Image out(error.height(), error.width(), Eigen::Vector3d::Zero());
  for (int y = 0; y < error.height(); ++y) {
    for (int x = 0; x < error.width(); ++x) {
      if (!valid(y, x)) continue;
      const double e = error(y, x);
      if (!(e >= 0)) {
        throw InvalidInput("visualize_error: errors must be >= 0");
      }
      if (e > threshold) {
        out(y, x) = Eigen::Vector3d(1.0, 0.0, 0.0);  // outlier
      } else {
        // White through yellow to orange as the error approaches the
        // threshold.
        const double t = e / threshold;
        out(y, x) = Eigen::Vector3d(1.0, 1.0 - 0.35 * t, 1.0 - t);
      }
    }
  }
  return out;
}

}  // namespace rigidflow
