// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/refine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>

namespace rigidflow {
namespace {

// Bilinear taps from pixel x into the block grid, centers aligned so that
// block b covers pixels [b*B, (b+1)*B). Matches sampling at
// (x + 0.5) / B - 0.5 with clamped borders.
struct BlockTaps {
  int b0, b1;
  double w1;  // weight of b1; b0 gets 1 - w1
};

BlockTaps block_taps(int x, int block, int blocks) {
  double bx = (x + 0.5) / block - 0.5;
  bx = std::clamp(bx, 0.0, static_cast<double>(blocks - 1));
  int b0 = std::clamp(static_cast<int>(std::floor(bx)), 0,
                      std::max(blocks - 2, 0));
  int b1 = std::min(b0 + 1, blocks - 1);
  return {b0, b1, bx - b0};
}

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Per-snapshot motion parameters; the depth log-scale stays live across
// the whole ring and is not part of a snapshot.
struct Snapshot {
  Grid<Twist> twists;
  Grid<double> logits;
};

Snapshot snapshot_of(const BlockParams& p) { return {p.twists, p.logits}; }

SceneFrame scale_depths(const SceneFrame& frame, double log_scale) {
  if (log_scale == 0.0) return frame;
  const double s = std::exp(log_scale);
  SceneFrame out = frame;
  for (std::size_t i = 0; i < out.d1.values.size(); ++i) {
    out.d1.values.data()[i] *= s;
  }
  for (std::size_t i = 0; i < out.d2.values.size(); ++i) {
    out.d2.values.data()[i] *= s;
  }
  if (out.d2_full) {
    for (std::size_t i = 0; i < out.d2_full->values.size(); ++i) {
      out.d2_full->values.data()[i] *= s;
    }
  }
  return out;
}

std::pair<SE3Field, SoftMask> upsample(const Snapshot& s, int block,
                                       int height, int width) {
  BlockParams p;
  p.block = block;
  p.twists = s.twists;
  p.logits = s.logits;
  return upsample_params(p, height, width);
}

// Weighted per-iteration sum as used inside the total loss, without the
// iteration decay.
double weighted_single(const IterationLosses& t, const LossWeights& w) {
  return t.l_p + t.l_p_ego + w.lambda_g * t.l_g + w.lambda_s * t.l_s +
         w.lambda_c * t.l_c + w.lambda_m * t.l_m;
}

// All six per-iteration terms for one snapshot at a given depth scale.
IterationLosses eval_terms(const SceneFrame& frame_s, const Snapshot& snap,
                           int block, const BinaryMask& m_noc,
                           const BinaryMask& m_ol, const LossWeights& weights,
                           MotionEstimate* est_out = nullptr) {
  auto [field, mask] = upsample(snap, block, frame_s.height(), frame_s.width());
  MotionEstimate est = MotionEstimate::compute(std::move(field),
                                               std::move(mask), frame_s);
  IterationLosses t;
  t.l_p = loss_temporal_photometric(frame_s, est, m_noc, weights.alpha);
  t.l_p_ego = loss_ego_photometric(frame_s, est, m_noc, m_ol, weights.alpha);
  t.l_g = loss_geometric(frame_s, est, m_noc);
  t.l_s = loss_smoothness_total(est, frame_s.d1, frame_s.i1, weights);
  t.l_c = loss_motion_consistency(est);
  t.l_m = loss_mask_regularization(est.mask, weights.gamma);
  if (est_out) *est_out = std::move(est);
  return t;
}

// Warp-dependent bundle only (photometric + geometric + smoothness), as a
// function of the twist field alone. The mask never enters these terms,
// so finite differences over block twists can skip the aggregation.
double warp_bundle(const SceneFrame& frame_s, const SE3Field& field,
                   const BinaryMask& m_noc, const LossWeights& weights) {
  MotionEstimate est;
  est.field = field;
  est.uvd = synthesize_scene_flow(frame_s.d1, field, frame_s.camera);
  est.f12 = est.uvd.flow();
  double v = loss_temporal_photometric(frame_s, est, m_noc, weights.alpha);
  v += weights.lambda_g * loss_geometric(frame_s, est, m_noc);
  v += weights.lambda_s *
       loss_smoothness_total(est, frame_s.d1, frame_s.i1, weights);
  return v;
}

// Ego photometric term as a function of the aggregated twist alone.
double ego_bundle(const SceneFrame& frame_s, const Twist& xi_ego,
                  const BinaryMask& m_noc, const BinaryMask& m_ol,
                  const LossWeights& weights) {
  MotionEstimate est;
  est.f_ego = rigid_flow(frame_s.d1, exp(xi_ego), frame_s.camera);
  return loss_ego_photometric(frame_s, est, m_noc, m_ol, weights.alpha);
}

struct Gradient {
  Grid<Twist> twists;
  Grid<double> logits;
  double depth_log_scale = 0.0;
};

// Gradient of the newest snapshot's weighted term sum (decay weight 1)
// with respect to the block parameters. Frozen snapshots do not depend on
// them, so this is the full objective gradient for the motion block.
Gradient motion_gradient(const SceneFrame& frame_s, const BlockParams& cur,
                         const MotionEstimate& est, const BinaryMask& m_noc,
                         const BinaryMask& m_ol, const LossWeights& weights,
                         double h) {
  const int height = frame_s.height();
  const int width = frame_s.width();
  const int bh = cur.twists.height();
  const int bw = cur.twists.width();
  Gradient g;
  g.twists = Grid<Twist>(bh, bw, Twist{});
  g.logits = Grid<double>(bh, bw, 0.0);

  // Finite differences through the warp-dependent terms, one block twist
  // coordinate at a time.
  Snapshot probe = snapshot_of(cur);
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      Eigen::Matrix<double, 6, 1> v = probe.twists(by, bx).vector();
      Eigen::Matrix<double, 6, 1> dv = Eigen::Matrix<double, 6, 1>::Zero();
      for (int k = 0; k < 6; ++k) {
        const double saved = v[k];
        double f[2];
        for (int side = 0; side < 2; ++side) {
          v[k] = saved + (side == 0 ? h : -h);
          probe.twists(by, bx) = Twist::from_vector(v);
          auto [field, mask] = upsample(probe, cur.block, height, width);
          f[side] = warp_bundle(frame_s, field, m_noc, weights);
        }
        v[k] = saved;
        probe.twists(by, bx) = Twist::from_vector(v);
        dv[k] = (f[0] - f[1]) / (2.0 * h);
      }
      g.twists(by, bx) = Twist::from_vector(dv);
    }
  }

  // Ego path: d(L_p_ego)/d(xi_ego) by central differences over the six
  // aggregated components ...
  const Twist xi_ego = est.ego_stats.mean_twist;
  Eigen::Matrix<double, 6, 1> d_ego = Eigen::Matrix<double, 6, 1>::Zero();
  {
    Eigen::Matrix<double, 6, 1> v = xi_ego.vector();
    for (int k = 0; k < 6; ++k) {
      const double saved = v[k];
      v[k] = saved + h;
      const double fp =
          ego_bundle(frame_s, Twist::from_vector(v), m_noc, m_ol, weights);
      v[k] = saved - h;
      const double fm =
          ego_bundle(frame_s, Twist::from_vector(v), m_noc, m_ol, weights);
      v[k] = saved;
      d_ego[k] = (fp - fm) / (2.0 * h);
    }
  }

  // ... plus the analytic d(L_c)/d(xi_ego): the consistency term reads the
  // aggregate both directly and through every pixel residual.
  const int hw = height * width;
  const TwistGrid logs = field_log(est.field);
  Eigen::Matrix<double, 6, 1> d_ego_c = Eigen::Matrix<double, 6, 1>::Zero();
  const Eigen::Matrix<double, 6, 1> ego_v = xi_ego.vector();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!logs.valid(y, x)) continue;
      const double m = est.mask(y, x);
      if (m == 0.0) continue;
      const Eigen::Matrix<double, 6, 1> d = logs.twists(y, x).vector() - ego_v;
      for (int k = 0; k < 6; ++k) {
        d_ego_c[k] -= m * (d[k] > 0 ? 1.0 : (d[k] < 0 ? -1.0 : 0.0));
      }
    }
  }
  d_ego_c /= hw;

  const Twist upstream =
      Twist::from_vector(d_ego + weights.lambda_c * d_ego_c);
  const AggregateGradients agg =
      aggregate_gradients(est.field, est.mask, upstream);

  // Per-pixel twist and mask gradients, then the adjoint of the bilinear
  // upsampling scatters them back onto the block grid.
  for (int y = 0; y < height; ++y) {
    const BlockTaps ty = block_taps(y, cur.block, bh);
    for (int x = 0; x < width; ++x) {
      const BlockTaps tx = block_taps(x, cur.block, bw);

      Eigen::Matrix<double, 6, 1> gt = agg.d_twists(y, x).vector();
      double gm = agg.d_mask(y, x);
      if (logs.valid(y, x)) {
        const double m = est.mask(y, x);
        const Eigen::Matrix<double, 6, 1> d =
            logs.twists(y, x).vector() - ego_v;
        for (int k = 0; k < 6; ++k) {
          gt[k] += weights.lambda_c * m / hw *
                   (d[k] > 0 ? 1.0 : (d[k] < 0 ? -1.0 : 0.0));
        }
        gm += weights.lambda_c * d.cwiseAbs().sum() / hw;
      }
      const double m = est.mask(y, x);
      const double gamma = weights.gamma;
      gm += weights.lambda_m * (-(1.0 + gamma) / ((gamma + m) * (gamma + m))) /
            hw;
      const double gl = gm * m * (1.0 - m);  // logistic derivative

      const double w00 = (1.0 - ty.w1) * (1.0 - tx.w1);
      const double w01 = (1.0 - ty.w1) * tx.w1;
      const double w10 = ty.w1 * (1.0 - tx.w1);
      const double w11 = ty.w1 * tx.w1;
      auto add = [&](int by, int bx, double w) {
        if (w == 0.0) return;
        g.twists(by, bx) = g.twists(by, bx) + Twist::from_vector(w * gt);
        g.logits(by, bx) += w * gl;
      };
      add(ty.b0, tx.b0, w00);
      add(ty.b0, tx.b1, w01);
      add(ty.b1, tx.b0, w10);
      add(ty.b1, tx.b1, w11);
    }
  }
  return g;
}

StepRecord make_record(int step, double total, const IterationLosses& t,
                       double l_d, double step_size) {
  StepRecord r;
  r.step = step;
  r.total = total;
  r.l_p = t.l_p;
  r.l_p_ego = t.l_p_ego;
  r.l_g = t.l_g;
  r.l_s = t.l_s;
  r.l_c = t.l_c;
  r.l_m = t.l_m;
  r.l_d = l_d;
  r.step_size = step_size;
  return r;
}

}  // namespace

BlockParams BlockParams::init(int image_height, int image_width, int block) {
  if (image_height < 1 || image_width < 1 || block < 1) {
    throw InvalidInput("block params: image size and block must be >= 1");
  }
  BlockParams p;
  p.block = block;
  const int bh = (image_height + block - 1) / block;
  const int bw = (image_width + block - 1) / block;
  p.twists = Grid<Twist>(bh, bw, Twist{});
  p.logits = Grid<double>(bh, bw, 0.0);
  return p;
}

BlockParams block_params_from_field(const SE3Field& field,
                                    const SoftMask& mask, int block) {
  require_same_shape(field.transforms.height(), field.transforms.width(),
                     mask.height(), mask.width(), "field vs mask");
  BlockParams p = BlockParams::init(field.transforms.height(),
                                    field.transforms.width(), block);
  const int bh = p.twists.height();
  const int bw = p.twists.width();
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      Eigen::Matrix<double, 6, 1> sum = Eigen::Matrix<double, 6, 1>::Zero();
      double msum = 0.0;
      int n = 0;
      for (int y = by * block;
           y < std::min((by + 1) * block, field.transforms.height()); ++y) {
        for (int x = bx * block;
             x < std::min((bx + 1) * block, field.transforms.width()); ++x) {
          if (!field.valid(y, x)) continue;
          sum += log(field.transforms(y, x)).vector();
          msum += mask(y, x);
          ++n;
        }
      }
      if (n > 0) {
        p.twists(by, bx) = Twist::from_vector(sum / n);
        const double m = std::clamp(msum / n, 1e-9, 1.0 - 1e-9);
        p.logits(by, bx) = std::log(m / (1.0 - m));
      }
    }
  }
  return p;
}

void OptimizerConfig::require_valid() const {
  if (max_steps < 0) throw InvalidInput("optimizer: max_steps must be >= 0");
  if (!(step_size > 0)) throw InvalidInput("optimizer: step_size must be > 0");
  if (!(backtrack_factor > 0) || !(backtrack_factor < 1)) {
    throw InvalidInput("optimizer: backtrack_factor must be in (0,1)");
  }
  if (max_backtracks < 1) {
    throw InvalidInput("optimizer: max_backtracks must be >= 1");
  }
  if (!(tolerance > 0)) throw InvalidInput("optimizer: tolerance must be > 0");
  if (n_iters < 1) throw InvalidInput("optimizer: n_iters must be >= 1");
  if (!(fd_step > 0)) throw InvalidInput("optimizer: fd_step must be > 0");
}

std::pair<SE3Field, SoftMask> upsample_params(const BlockParams& params,
                                              int height, int width) {
  if (height < 1 || width < 1 || params.block < 1) {
    throw InvalidInput("upsample: size and block must be >= 1");
  }
  const int bh = params.twists.height();
  const int bw = params.twists.width();
  require_same_shape(bh, bw, params.logits.height(), params.logits.width(),
                     "twists vs logits");
  if (bh < (height + params.block - 1) / params.block ||
      bw < (width + params.block - 1) / params.block) {
    throw InvalidInput("upsample: block grid too small for image");
  }
  SE3Field field(height, width);
  SoftMask mask(height, width, 0.0);
  for (int y = 0; y < height; ++y) {
    const BlockTaps ty = block_taps(y, params.block, bh);
    for (int x = 0; x < width; ++x) {
      const BlockTaps tx = block_taps(x, params.block, bw);
      const double w00 = (1.0 - ty.w1) * (1.0 - tx.w1);
      const double w01 = (1.0 - ty.w1) * tx.w1;
      const double w10 = ty.w1 * (1.0 - tx.w1);
      const double w11 = ty.w1 * tx.w1;
      const Eigen::Matrix<double, 6, 1> v =
          w00 * params.twists(ty.b0, tx.b0).vector() +
          w01 * params.twists(ty.b0, tx.b1).vector() +
          w10 * params.twists(ty.b1, tx.b0).vector() +
          w11 * params.twists(ty.b1, tx.b1).vector();
      const double l = w00 * params.logits(ty.b0, tx.b0) +
                       w01 * params.logits(ty.b0, tx.b1) +
                       w10 * params.logits(ty.b1, tx.b0) +
                       w11 * params.logits(ty.b1, tx.b1);
      field.transforms(y, x) = exp(Twist::from_vector(v));
      mask(y, x) = logistic(l);
    }
  }
  return {std::move(field), std::move(mask)};
}

std::string history_to_csv(const std::vector<StepRecord>& history) {
  std::string out = "step,total,L_p,L_p_ego,L_g,L_s,L_c,L_m,L_d,step_size\n";
  char line[512];
  for (const StepRecord& r : history) {
    std::snprintf(line, sizeof(line),
                  "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  r.step, r.total, r.l_p, r.l_p_ego, r.l_g, r.l_s, r.l_c,
                  r.l_m, r.l_d, r.step_size);
    out += line;
  }
  return out;
}

RefineResult refine(const SceneFrame& frame, const BlockParams& init,
                    const LossMasks& masks, const LossWeights& weights,
                    const OptimizerConfig& cfg) {
  frame.require_consistent();
  weights.require_valid();
  cfg.require_valid();
  const int height = frame.height();
  const int width = frame.width();
  require_same_shape(masks.m_noc.height(), masks.m_noc.width(), height, width,
                     "m_noc vs frame");

  const int n = cfg.n_iters;
  BlockParams cur = init;
  SceneFrame frame_s = scale_depths(frame, cur.depth_log_scale);

  // The outlier gate is held fixed for the whole run: either the supplied
  // mask or one computed from the initial ego-flow residuals.
  BinaryMask m_ol(height, width, 1);
  {
    MotionEstimate est0;
    auto [field0, mask0] = upsample(snapshot_of(cur), cur.block, height, width);
    est0 = MotionEstimate::compute(std::move(field0), std::move(mask0),
                                   frame_s);
    m_ol = masks.m_ol ? *masks.m_ol
                      : ego_outlier_mask(frame_s, est0, masks, weights.alpha);
  }

  const bool has_stereo = frame.right.has_value();
  auto eval_l_d = [&](const SceneFrame& fs) {
    return has_stereo ? loss_spatial_photometric(fs, weights.alpha) : 0.0;
  };

  // Ring of the last n accepted iterates, pre-filled with the initial
  // point, plus cached per-snapshot term sums at the live depth scale.
  std::deque<Snapshot> ring;
  std::deque<double> ring_sums;
  MotionEstimate cur_est;
  IterationLosses cur_terms = eval_terms(frame_s, snapshot_of(cur), cur.block,
                                         masks.m_noc, m_ol, weights, &cur_est);
  const double s_init = weighted_single(cur_terms, weights);
  for (int i = 0; i < n; ++i) {
    ring.push_back(snapshot_of(cur));
    ring_sums.push_back(s_init);
  }
  double l_d = eval_l_d(frame_s);

  auto ring_total = [&]() {
    KahanSum t;
    for (int i = 0; i < n; ++i) {
      t.add(std::pow(weights.zeta, n - 1 - i) * ring_sums[i]);
    }
    return l_d + t.value();
  };
  double obj = ring_total();
  if (!std::isfinite(obj)) {
    throw NumericFailure("refine: loss not finite at the initial point");
  }

  RefineResult out;
  out.history.push_back(make_record(0, obj, cur_terms, l_d, 0.0));
  out.status = RefineStatus::kStepBudget;

  // Image motion is ~f/z sensitive to translation but ~f to rotation, so a
  // shared step size crawls along the translation axis. Scaling translation
  // gradients by each block's squared mean depth evens out the metric; the
  // line-search scale absorbs the common focal factor.
  Grid<double> t_metric(cur.twists.height(), cur.twists.width(), 1.0);
  {
    KahanSum zsum;
    long zcount = 0;
    for (int y = 0; y < frame_s.height(); ++y) {
      for (int x = 0; x < frame_s.width(); ++x) {
        if (!frame_s.d1.valid(y, x)) continue;
        zsum.add(frame_s.d1.values(y, x));
        ++zcount;
      }
    }
    const double global = zcount > 0 ? zsum.value() / zcount : 1.0;
    for (int by = 0; by < t_metric.height(); ++by) {
      for (int bx = 0; bx < t_metric.width(); ++bx) {
        KahanSum bsum;
        long bcount = 0;
        for (int y = by * cur.block;
             y < std::min((by + 1) * cur.block, frame_s.height()); ++y) {
          for (int x = bx * cur.block;
               x < std::min((bx + 1) * cur.block, frame_s.width()); ++x) {
            if (!frame_s.d1.valid(y, x)) continue;
            bsum.add(frame_s.d1.values(y, x));
            ++bcount;
          }
        }
        const double zb = bcount > 0 ? bsum.value() / bcount : global;
        t_metric(by, bx) = zb * zb;
      }
    }
  }

  double alpha = cfg.step_size;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    Gradient g = motion_gradient(frame_s, cur, cur_est, masks.m_noc,
                                 m_ol, weights, cfg.fd_step);
    for (int by = 0; by < g.twists.height(); ++by) {
      for (int bx = 0; bx < g.twists.width(); ++bx) {
        Eigen::Matrix<double, 6, 1> gv = g.twists(by, bx).vector();
        gv.head<3>() *= t_metric(by, bx);
        g.twists(by, bx) = Twist::from_vector(gv);
      }
    }
    double g_scale = 0.0;
    if (cfg.optimize_depth_scale) {
      // Central differences over the depth log-scale. With detachment only
      // the stereo term and the newest snapshot see the perturbation;
      // otherwise every ring entry does (with the shifted decay weights the
      // trial objective will use).
      const double h = cfg.fd_step;
      double f[2];
      for (int side = 0; side < 2; ++side) {
        const double s = cur.depth_log_scale + (side == 0 ? h : -h);
        const SceneFrame fs = scale_depths(frame, s);
        double v = eval_l_d(fs);
        if (cfg.detach_depth) {
          v += weighted_single(eval_terms(fs, snapshot_of(cur), cur.block,
                                          masks.m_noc, m_ol, weights),
                               weights);
        } else {
          KahanSum t;
          for (int i = 1; i < n; ++i) {
            t.add(std::pow(weights.zeta, n - i) *
                  weighted_single(eval_terms(fs, ring[i], cur.block,
                                             masks.m_noc, m_ol, weights),
                                  weights));
          }
          t.add(weighted_single(eval_terms(fs, snapshot_of(cur), cur.block,
                                           masks.m_noc, m_ol, weights),
                                weights));
          v += t.value();
        }
        f[side] = v;
      }
      g_scale = (f[0] - f[1]) / (2.0 * h);
    }

    // Objective of [ring[1..], trial]; everything frozen shifts one decay
    // step, so only the trial snapshot needs evaluation unless the depth
    // scale moved.
    KahanSum shifted;
    for (int i = 1; i < n; ++i) {
      shifted.add(std::pow(weights.zeta, n - i) * ring_sums[i]);
    }
    const double frozen_tail = shifted.value();

    bool accepted = false;
    double a = alpha;
    for (int t = 0; t < cfg.max_backtracks; ++t, a *= cfg.backtrack_factor) {
      BlockParams trial = cur;
      for (int by = 0; by < trial.twists.height(); ++by) {
        for (int bx = 0; bx < trial.twists.width(); ++bx) {
          trial.twists(by, bx) =
              trial.twists(by, bx) + (-a) * g.twists(by, bx);
          trial.logits(by, bx) -= a * g.logits(by, bx);
        }
      }
      if (cfg.optimize_depth_scale) trial.depth_log_scale -= a * g_scale;

      IterationLosses trial_terms;
      MotionEstimate trial_est;
      double trial_obj;
      double trial_l_d = l_d;
      try {
        const bool scale_moved =
            trial.depth_log_scale != cur.depth_log_scale;
        const SceneFrame& fs_ref = frame_s;
        SceneFrame fs_trial;
        const SceneFrame* fs = &fs_ref;
        if (scale_moved) {
          fs_trial = scale_depths(frame, trial.depth_log_scale);
          fs = &fs_trial;
        }
        trial_terms = eval_terms(*fs, snapshot_of(trial), trial.block,
                                 masks.m_noc, m_ol, weights, &trial_est);
        double tail = frozen_tail;
        if (scale_moved) {
          trial_l_d = eval_l_d(*fs);
          KahanSum t2;
          for (int i = 1; i < n; ++i) {
            t2.add(std::pow(weights.zeta, n - i) *
                   weighted_single(eval_terms(*fs, ring[i], cur.block,
                                              masks.m_noc, m_ol, weights),
                                   weights));
          }
          tail = t2.value();
        }
        trial_obj = trial_l_d + tail + weighted_single(trial_terms, weights);
      } catch (const Error&) {
        continue;  // infeasible trial (e.g. empty mask support); backtrack
      }
      if (!std::isfinite(trial_obj) || !(trial_obj < obj - cfg.tolerance)) {
        continue;
      }

      // Accept: rotate the ring and refresh the caches.
      const bool scale_moved = trial.depth_log_scale != cur.depth_log_scale;
      cur = std::move(trial);
      if (scale_moved) {
        frame_s = scale_depths(frame, cur.depth_log_scale);
        l_d = eval_l_d(frame_s);
        for (int i = 1; i < n; ++i) {
          ring_sums[i] = weighted_single(
              eval_terms(frame_s, ring[i], cur.block, masks.m_noc, m_ol,
                         weights),
              weights);
        }
      }
      ring.pop_front();
      ring_sums.pop_front();
      ring.push_back(snapshot_of(cur));
      ring_sums.push_back(weighted_single(trial_terms, weights));
      cur_terms = trial_terms;
      cur_est = std::move(trial_est);
      obj = ring_total();
      out.history.push_back(make_record(step, obj, cur_terms, l_d, a));
      ++out.accepted_steps;
      accepted = true;
      alpha = a * 2.0;  // grow on success; backtracking bounds overshoot
      break;
    }
    if (!accepted) {
      out.status = RefineStatus::kStationary;
      break;
    }
  }

  out.params = cur;
  out.estimate = std::move(cur_est);
  return out;
}

std::vector<double> finite_diff_gradient(
    const std::function<double(const std::vector<double>&)>& fn,
    const std::vector<double>& at, double h) {
  if (!(h > 0)) throw InvalidInput("finite_diff_gradient: h must be > 0");
  std::vector<double> x = at;
  std::vector<double> g(at.size(), 0.0);
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = fn(x);
    x[i] = saved - h;
    const double fm = fn(x);
    x[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericFailure("finite_diff_gradient: non-finite evaluation");
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace rigidflow
