// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/losses.hpp"

#include <cmath>

#include "rigidflow/parallel.hpp"

namespace rigidflow {
namespace {

// Warps the target image with the crop/full policy of the frame: prefer
// the uncropped source so content leaving the crop stays supervised.
WarpedImage warp_target_image(const SceneFrame& frame, const FlowField& flow) {
  if (frame.i2_full) return warp_bilinear(*frame.i2_full, flow, frame.window);
  return warp_bilinear(frame.i2, flow);
}

WarpedScalar warp_target_depth(const SceneFrame& frame, const FlowField& flow) {
  if (frame.d2_full) return warp_bilinear(*frame.d2_full, flow, frame.window);
  return warp_bilinear(frame.d2, flow);
}

// Out-of-view warp samples carry no signal: fill them from the reference
// image so the ssim windows of nearby valid pixels compare real content
// instead of the zero placeholder left by the warp. Without this, a static
// scene reads a spurious border error and the loss rewards pushing samples
// out of bounds.
Image fill_invalid(const Image& reference, const WarpedImage& warped) {
  Image out = warped.values;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (!warped.valid(y, x)) out(y, x) = reference(y, x);
    }
  }
  return out;
}

// Mean over H*W of pe where the warp is valid and every given mask is 1.
double masked_pe_mean(const Grid<double>& pe, const BinaryMask& warp_valid,
                      const std::vector<const BinaryMask*>& gates) {
  const int h = pe.height();
  const int w = pe.width();
  const double sum = sum_rows(h, [&](int y) {
    KahanSum row;
    for (int x = 0; x < w; ++x) {
      if (!warp_valid(y, x)) continue;
      bool keep = true;
      for (const BinaryMask* g : gates) {
        if (!(*g)(y, x)) {
          keep = false;
          break;
        }
      }
      if (keep) row.add(pe(y, x));
    }
    return row.value();
  });
  return sum / (static_cast<double>(h) * w);
}

}  // namespace

BinaryMask ego_outlier_mask(const SceneFrame& frame,
                            const MotionEstimate& est, const LossMasks& masks,
                            double alpha) {
  const WarpedImage warped = warp_target_image(frame, est.f_ego);
  const Grid<double> pe =
      photometric_error(frame.i1, fill_invalid(frame.i1, warped), alpha);
  return outlier_mask(pe, warped.valid, masks.p_lo, masks.p_hi).mask;
}

void LossWeights::require_valid() const {
  if (!(alpha >= 0) || !(alpha <= 1)) {
    throw InvalidInput("loss weights: alpha must be in [0,1]");
  }
  if (!(beta >= 0) || !is_finite(beta)) {
    throw InvalidInput("loss weights: beta must be finite and >= 0");
  }
  if (!(gamma > 0)) throw InvalidInput("loss weights: gamma must be > 0");
  if (!(zeta > 0) || !(zeta <= 1)) {
    throw InvalidInput("loss weights: zeta must be in (0,1]");
  }
  for (double l : {lambda_g, lambda_s, lambda_c, lambda_m, lambda_st,
                   lambda_sd, lambda_sf}) {
    if (!(l >= 0) || !is_finite(l)) {
      throw InvalidInput("loss weights: lambdas must be finite and >= 0");
    }
  }
  if (n_iters < 1) throw InvalidInput("loss weights: n_iters must be >= 1");
}

MotionEstimate MotionEstimate::compute(SE3Field field, SoftMask mask,
                                       const SceneFrame& frame) {
  const int h = frame.height();
  const int w = frame.width();
  require_same_shape(h, w, field.transforms.height(), field.transforms.width(),
                     "frame vs motion field");
  require_same_shape(h, w, mask.height(), mask.width(), "frame vs mask");

  MotionEstimate est;
  est.field = std::move(field);
  est.mask = std::move(mask);
  est.uvd = synthesize_scene_flow(frame.d1, est.field, frame.camera);
  est.f12 = est.uvd.flow();
  est.t_ego = aggregate_ego_motion(est.field, est.mask, &est.ego_stats);
  est.f_ego = rigid_flow(frame.d1, est.t_ego, frame.camera);
  return est;
}

double loss_temporal_photometric(const SceneFrame& frame,
                                 const MotionEstimate& est,
                                 const BinaryMask& m_noc, double alpha) {
  require_same_shape(frame.height(), frame.width(), m_noc.height(),
                     m_noc.width(), "frame vs occlusion mask");
  const WarpedImage warped = warp_target_image(frame, est.f12);
  const Grid<double> pe =
      photometric_error(frame.i1, fill_invalid(frame.i1, warped), alpha);
  return masked_pe_mean(pe, warped.valid, {&m_noc});
}

double loss_ego_photometric(const SceneFrame& frame, const MotionEstimate& est,
                            const BinaryMask& m_noc, const BinaryMask& m_ol,
                            double alpha) {
  require_same_shape(frame.height(), frame.width(), m_noc.height(),
                     m_noc.width(), "frame vs occlusion mask");
  require_same_shape(frame.height(), frame.width(), m_ol.height(),
                     m_ol.width(), "frame vs outlier mask");
  const WarpedImage warped = warp_target_image(frame, est.f_ego);
  const Grid<double> pe =
      photometric_error(frame.i1, fill_invalid(frame.i1, warped), alpha);
  return masked_pe_mean(pe, warped.valid, {&m_noc, &m_ol});
}

double loss_geometric(const SceneFrame& frame, const MotionEstimate& est,
                      const BinaryMask& m_noc) {
  const int h = frame.height();
  const int w = frame.width();
  require_same_shape(h, w, m_noc.height(), m_noc.width(),
                     "frame vs occlusion mask");
  const WarpedScalar warped = warp_target_depth(frame, est.f12);
  const double sum = sum_rows(h, [&](int y) {
    KahanSum row;
    for (int x = 0; x < w; ++x) {
      if (!m_noc(y, x) || !warped.valid(y, x)) continue;
      if (!est.uvd.valid(y, x) || !frame.d1.valid(y, x)) continue;
      const double dbar = frame.d1.values(y, x) + est.uvd.delta_d(y, x);
      const double d2w = warped.values(y, x);
      if (!(dbar > 0) || !(d2w > 0)) {
        throw InvalidInput("loss_geometric: non-positive depth in valid region");
      }
      row.add(std::abs(dbar - d2w) / (dbar + d2w));
    }
    return row.value();
  });
  return sum / (static_cast<double>(h) * w);
}

ChannelView channel_view(const Grid<double>& g, const BinaryMask* valid) {
  ChannelView v;
  v.channels = 1;
  v.height = g.height();
  v.width = g.width();
  v.at = [&g](int, int y, int x) { return g(y, x); };
  if (valid) {
    v.valid = [valid](int y, int x) { return (*valid)(y, x) != 0; };
  }
  return v;
}

ChannelView channel_view(const FlowField& f) {
  ChannelView v;
  v.channels = 2;
  v.height = f.height();
  v.width = f.width();
  v.at = [&f](int c, int y, int x) { return f.values(y, x)[c]; };
  v.valid = [&f](int y, int x) { return f.valid(y, x) != 0; };
  return v;
}

ChannelView channel_view(const TwistGrid& t) {
  ChannelView v;
  v.channels = 6;
  v.height = t.twists.height();
  v.width = t.twists.width();
  v.at = [&t](int c, int y, int x) {
    const Twist& tw = t.twists(y, x);
    return c < 3 ? tw.v[c] : tw.w[c - 3];
  };
  v.valid = [&t](int y, int x) { return t.valid(y, x) != 0; };
  return v;
}

double loss_smoothness(const ChannelView& o, const Image& i1, int order,
                       double beta) {
  if (order != 1 && order != 2) {
    throw InvalidInput("loss_smoothness: order must be 1 or 2");
  }
  const int h = o.height;
  const int w = o.width;
  require_same_shape(h, w, i1.height(), i1.width(), "smoothness grid vs image");

  const auto ok = [&](int y, int x) { return !o.valid || o.valid(y, x); };
  const auto diff = [&](int c, int y, int x, int dy, int dx) {
    // k-fold forward difference along (dy, dx).
    if (order == 1) return o.at(c, y + dy, x + dx) - o.at(c, y, x);
    return o.at(c, y + 2 * dy, x + 2 * dx) -
           2.0 * o.at(c, y + dy, x + dx) + o.at(c, y, x);
  };
  const auto stencil_ok = [&](int y, int x, int dy, int dx) {
    for (int s = 0; s <= order; ++s) {
      if (!ok(y + s * dy, x + s * dx)) return false;
    }
    return true;
  };

  const double sum = sum_rows(h, [&](int y) {
    KahanSum row;
    for (int x = 0; x < w; ++x) {
      if (x + order <= w - 1 && stencil_ok(y, x, 0, 1)) {
        const double gx = (i1(y, x + 1) - i1(y, x)).cwiseAbs().mean();
        const double wx = std::exp(-beta * gx);
        for (int c = 0; c < o.channels; ++c) {
          row.add(std::abs(diff(c, y, x, 0, 1)) * wx);
        }
      }
      if (y + order <= h - 1 && stencil_ok(y, x, 1, 0)) {
        const double gy = (i1(y + 1, x) - i1(y, x)).cwiseAbs().mean();
        const double wy = std::exp(-beta * gy);
        for (int c = 0; c < o.channels; ++c) {
          row.add(std::abs(diff(c, y, x, 1, 0)) * wy);
        }
      }
    }
    return row.value();
  });
  return sum / (static_cast<double>(h) * w * o.channels);
}

double loss_smoothness_total(const MotionEstimate& est, const DepthMap& d1,
                             const Image& i1, const LossWeights& weights) {
  double total = 0.0;
  if (weights.lambda_st > 0) {
    const TwistGrid lg = field_log(est.field);
    total += weights.lambda_st * loss_smoothness(channel_view(lg), i1, 1,
                                                 weights.beta);
  }
  if (weights.lambda_sd > 0) {
    Grid<double> d = d1.values;
    if (weights.normalize_depth_smoothness) {
      KahanSum s;
      long count = 0;
      for (int y = 0; y < d.height(); ++y) {
        for (int x = 0; x < d.width(); ++x) {
          if (d1.valid(y, x)) {
            s.add(d(y, x));
            ++count;
          }
        }
      }
      if (count > 0 && s.value() > 0) {
        const double inv_mean = count / s.value();
        for (int y = 0; y < d.height(); ++y) {
          for (int x = 0; x < d.width(); ++x) d(y, x) *= inv_mean;
        }
      }
    }
    total += weights.lambda_sd *
             loss_smoothness(channel_view(d, &d1.valid), i1, 1, weights.beta);
  }
  if (weights.lambda_sf > 0) {
    total += weights.lambda_sf *
             loss_smoothness(channel_view(est.f12), i1, 2, weights.beta);
  }
  return total;
}

double loss_motion_consistency(const MotionEstimate& est) {
  const TwistGrid lg = field_log(est.field);
  const Vector6 xi_ego = log(est.t_ego).vector();
  const int h = lg.twists.height();
  const int w = lg.twists.width();
  require_same_shape(h, w, est.mask.height(), est.mask.width(),
                     "field vs mask");
  const double sum = sum_rows(h, [&](int y) {
    KahanSum row;
    for (int x = 0; x < w; ++x) {
      if (!lg.valid(y, x)) continue;
      const double m = est.mask(y, x);
      if (m == 0) continue;
      row.add(m * (lg.twists(y, x).vector() - xi_ego).cwiseAbs().sum());
    }
    return row.value();
  });
  return sum / (static_cast<double>(h) * w);
}

double loss_mask_regularization(const SoftMask& mask, double gamma) {
  if (!(gamma > 0)) {
    throw InvalidInput("loss_mask_regularization: gamma must be > 0");
  }
  const int h = mask.height();
  const int w = mask.width();
  const double sum = sum_rows(h, [&](int y) {
    KahanSum row;
    for (int x = 0; x < w; ++x) {
      const double m = mask(y, x);
      if (!(m >= 0) || !(m <= 1)) {
        throw InvalidInput("loss_mask_regularization: mask outside [0,1]");
      }
      row.add((1.0 - m) / (gamma + m));
    }
    return row.value();
  });
  return sum / (static_cast<double>(h) * w);
}

double loss_spatial_photometric(const SceneFrame& frame, double alpha) {
  if (!frame.right) {
    throw InvalidInput("loss_spatial_photometric: frame has no right view");
  }
  if (!(frame.camera.baseline > 0)) {
    throw InvalidInput("loss_spatial_photometric: camera has no baseline");
  }
  const int h = frame.height();
  const int w = frame.width();
  FlowField stereo(h, w);
  stereo.valid.fill(0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!frame.d1.valid(y, x)) continue;
      const double d = frame.d1.values(y, x);
      if (!(d > 0)) continue;
      stereo.values(y, x) = {-disparity_from_depth(frame.camera, d), 0.0};
      stereo.valid(y, x) = 1;
    }
  }
  const WarpedImage warped = warp_bilinear(*frame.right, stereo);
  const Grid<double> pe =
      photometric_error(frame.i1, fill_invalid(frame.i1, warped), alpha);
  KahanSum sum;
  long count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!warped.valid(y, x)) continue;
      sum.add(pe(y, x));
      ++count;
    }
  }
  return count > 0 ? sum.value() / count : 0.0;
}

LossBreakdown loss_total(const SceneFrame& frame,
                         const std::vector<MotionEstimate>& estimates,
                         const LossMasks& masks, const LossWeights& weights) {
  weights.require_valid();
  if (estimates.empty()) {
    throw InvalidInput("loss_total: need at least one estimate");
  }
  const int n = static_cast<int>(estimates.size());

  LossBreakdown out;
  if (frame.right) {
    out.l_d = loss_spatial_photometric(frame, weights.alpha);
  }
  KahanSum total;
  total.add(out.l_d);
  for (int i = 0; i < n; ++i) {
    const MotionEstimate& est = estimates[i];
    IterationLosses it;
    it.weight = std::pow(weights.zeta, n - 1 - i);
    it.l_p = loss_temporal_photometric(frame, est, masks.m_noc, weights.alpha);
    const BinaryMask m_ol = masks.m_ol
                                ? *masks.m_ol
                                : ego_outlier_mask(frame, est, masks, weights.alpha);
    it.l_p_ego =
        loss_ego_photometric(frame, est, masks.m_noc, m_ol, weights.alpha);
    it.l_g = loss_geometric(frame, est, masks.m_noc);
    it.l_s = loss_smoothness_total(est, frame.d1, frame.i1, weights);
    it.l_c = loss_motion_consistency(est);
    it.l_m = loss_mask_regularization(est.mask, weights.gamma);
    total.add(it.weight *
              (it.l_p + it.l_p_ego + weights.lambda_g * it.l_g +
               weights.lambda_s * it.l_s + weights.lambda_c * it.l_c +
               weights.lambda_m * it.l_m));
    out.iterations.push_back(it);
  }
  out.total = total.value();
  return out;
}

}  // namespace rigidflow
