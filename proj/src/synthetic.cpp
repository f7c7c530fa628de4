// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/synthetic.hpp"

#include <json.hpp>

#include <cmath>
#include <utility>

#include "rigidflow/parallel.hpp"
#include "rigidflow/rng.hpp"

namespace rigidflow {
namespace {

using nlohmann::json;

double quintic(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(std::uint64_t seed, double u, double v) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const auto i = static_cast<std::int64_t>(fu);
  const auto j = static_cast<std::int64_t>(fv);
  const double su = quintic(u - fu);
  const double sv = quintic(v - fv);
  const double v00 = hash_lattice(seed, i, j);
  const double v10 = hash_lattice(seed, i + 1, j);
  const double v01 = hash_lattice(seed, i, j + 1);
  const double v11 = hash_lattice(seed, i + 1, j + 1);
  const double top = v00 + (v10 - v00) * su;
  const double bot = v01 + (v11 - v01) * su;
  return top + (bot - top) * sv;
}

std::uint64_t channel_seed(std::uint64_t scene_seed, std::uint64_t offset,
                           int channel) {
  SplitMix64 mix(scene_seed ^ ((offset + 1) * 0x9e3779b97f4a7c15ull) ^
                 (static_cast<std::uint64_t>(channel + 1) << 56));
  return mix.next_u64();
}

Eigen::Vector3d texel(const TextureSpec& tex, std::uint64_t scene_seed,
                      double tu, double tv) {
  if (tex.kind == TextureSpec::Kind::kChecker) {
    const auto pu = static_cast<std::int64_t>(std::floor(tu / tex.scale));
    const auto pv = static_cast<std::int64_t>(std::floor(tv / tex.scale));
    return ((pu + pv) & 1) ? tex.color_b : tex.color_a;
  }
  Eigen::Vector3d c;
  for (int ch = 0; ch < 3; ++ch) {
    const double n = value_noise(channel_seed(scene_seed, tex.seed_offset, ch),
                                 tu / tex.scale, tv / tex.scale);
    c[ch] = std::clamp(tex.base + tex.amplitude * (2.0 * n - 1.0), 0.0, 1.0);
  }
  return c;
}

// A plane (optionally bounded to a rectangle) expressed in one view's
// camera frame. Texture coordinates are meters along (u, v) from the
// anchor, so the pattern rides rigidly with the surface across views.
struct ViewSurface {
  Vector3 anchor;
  Vector3 u, v, n;
  double hu = 0, hv = 0;
  bool bounded = false;
  const TextureSpec* tex = nullptr;
};

ViewSurface transformed(const ViewSurface& s, const RigidTransform& x) {
  ViewSurface out = s;
  const Matrix3 r = x.rotation_matrix();
  out.anchor = act(x, s.anchor);
  out.u = r * s.u;
  out.v = r * s.v;
  out.n = r * s.n;
  return out;
}

struct Hit {
  double t = 0;       // ray parameter; depth since dir.z == 1
  int surface = -1;   // index into the view's surface list
  double tu = 0, tv = 0;
};

bool raycast(const std::vector<ViewSurface>& surfaces, const Vector3& dir,
             Hit* best) {
  best->surface = -1;
  for (int i = 0; i < static_cast<int>(surfaces.size()); ++i) {
    const ViewSurface& s = surfaces[i];
    const double denom = s.n.dot(dir);
    if (std::abs(denom) < 1e-12) continue;
    const double t = s.n.dot(s.anchor) / denom;
    if (!(t > kMinDepth)) continue;
    if (best->surface >= 0 && t >= best->t) continue;
    const Vector3 d = t * dir - s.anchor;
    const double tu = d.dot(s.u);
    const double tv = d.dot(s.v);
    if (s.bounded && (std::abs(tu) > s.hu || std::abs(tv) > s.hv)) continue;
    *best = {t, i, tu, tv};
  }
  return best->surface >= 0;
}

Vector3 pixel_ray(const PinholeCamera& cam, double x, double y) {
  return {(x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0};
}

struct ViewRender {
  Image image;
  DepthMap depth;
  Grid<int> surface;
  Grid<Hit> hits;

  ViewRender(int h, int w)
      : image(h, w, Eigen::Vector3d::Zero()),
        depth(h, w),
        surface(h, w, -1),
        hits(h, w) {}
};

ViewRender render_view(const std::vector<ViewSurface>& surfaces,
                       const PinholeCamera& cam, int h, int w,
                       std::uint64_t seed) {
  ViewRender out(h, w);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      Hit hit;
      if (!raycast(surfaces, pixel_ray(cam, x, y), &hit)) continue;
      const ViewSurface& s = surfaces[hit.surface];
      out.image(y, x) = texel(*s.tex, seed, hit.tu, hit.tv);
      out.depth.values(y, x) = hit.t;
      out.depth.valid(y, x) = 1;
      out.surface(y, x) = hit.surface;
      out.hits(y, x) = hit;
    }
  });
  return out;
}

template <typename T>
Grid<T> crop_grid(const Grid<T>& full, const CropWindow& win) {
  Grid<T> out(win.height, win.width);
  for (int y = 0; y < win.height; ++y) {
    for (int x = 0; x < win.width; ++x) {
      out(y, x) = full(y + win.y0, x + win.x0);
    }
  }
  return out;
}

bool transform_is_identity(const RigidTransform& t) {
  return t.translation().norm() == 0.0 && t.rotation_angle() == 0.0;
}

// JSON helpers -------------------------------------------------------------

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ParseError(std::string("unknown key \"") + item.key() +
                       "\" in " + where);
    }
  }
}

Vector3 vec3_from_json(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(std::string(where) + ": expected an array of 3 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

RigidTransform motion_from_json(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 6) {
    throw ParseError(std::string(where) +
                     ": expected a 6-component twist array");
  }
  Vector6 xi;
  for (int i = 0; i < 6; ++i) xi[i] = j[i].get<double>();
  return exp(Twist::from_vector(xi));
}

json motion_to_json(const RigidTransform& t) {
  const Vector6 xi = log(t).vector();
  return json::array({xi[0], xi[1], xi[2], xi[3], xi[4], xi[5]});
}

TextureSpec texture_from_json(const json& j) {
  check_keys(j,
             {"kind", "scale", "seed_offset", "base", "amplitude", "color_a",
              "color_b"},
             "texture");
  TextureSpec t;
  if (j.contains("kind")) {
    const auto kind = j["kind"].get<std::string>();
    if (kind == "noise") {
      t.kind = TextureSpec::Kind::kNoise;
    } else if (kind == "checker") {
      t.kind = TextureSpec::Kind::kChecker;
    } else {
      throw ParseError("texture kind must be \"noise\" or \"checker\"");
    }
  }
  if (j.contains("scale")) t.scale = j["scale"].get<double>();
  if (j.contains("seed_offset")) {
    t.seed_offset = j["seed_offset"].get<std::uint64_t>();
  }
  if (j.contains("base")) t.base = j["base"].get<double>();
  if (j.contains("amplitude")) t.amplitude = j["amplitude"].get<double>();
  if (j.contains("color_a")) t.color_a = vec3_from_json(j["color_a"], "color_a");
  if (j.contains("color_b")) t.color_b = vec3_from_json(j["color_b"], "color_b");
  if (!(t.scale > 0)) throw ParseError("texture scale must be positive");
  return t;
}

json texture_to_json(const TextureSpec& t) {
  json j;
  j["kind"] = t.kind == TextureSpec::Kind::kNoise ? "noise" : "checker";
  j["scale"] = t.scale;
  j["seed_offset"] = t.seed_offset;
  if (t.kind == TextureSpec::Kind::kNoise) {
    j["base"] = t.base;
    j["amplitude"] = t.amplitude;
  } else {
    j["color_a"] = {t.color_a[0], t.color_a[1], t.color_a[2]};
    j["color_b"] = {t.color_b[0], t.color_b[1], t.color_b[2]};
  }
  return j;
}

}  // namespace

GroundTruth render(const SceneSpec& spec) {
  if (spec.full_width <= 0 || spec.full_height <= 0) {
    throw InvalidInput("scene: full resolution must be positive");
  }
  spec.crop.require_inside(spec.full_height, spec.full_width);
  spec.camera.require_valid();

  // Frame-1 geometry in world (= frame-1 camera) coordinates, objects
  // first so coplanar ties resolve to the earlier object deterministically.
  std::vector<ViewSurface> base;
  std::vector<RigidTransform> world_motion;
  std::vector<bool> is_static;
  for (const PatchSpec& p : spec.objects) {
    ViewSurface s;
    const double ulen = p.axis_u.norm();
    if (!(ulen > 1e-12)) throw InvalidInput("object axis_u is degenerate");
    s.u = p.axis_u / ulen;
    Vector3 v = p.axis_v - p.axis_v.dot(s.u) * s.u;
    const double vlen = v.norm();
    if (!(vlen > 1e-12)) {
      throw InvalidInput("object axes are parallel or degenerate");
    }
    s.v = v / vlen;
    s.n = s.u.cross(s.v);
    s.anchor = p.center;
    if (!(p.half_u > 0) || !(p.half_v > 0)) {
      throw InvalidInput("object half extents must be positive");
    }
    s.hu = p.half_u;
    s.hv = p.half_v;
    s.bounded = true;
    s.tex = &p.texture;
    base.push_back(s);
    world_motion.push_back(p.motion);
    is_static.push_back(transform_is_identity(p.motion));
  }
  {
    ViewSurface bg;
    const double nlen = spec.background.normal.norm();
    if (!(nlen > 1e-12)) throw InvalidInput("background normal is degenerate");
    bg.n = spec.background.normal / nlen;
    bg.anchor = bg.n * spec.background.distance;
    const Vector3 ref =
        std::abs(bg.n.x()) < 0.9 ? Vector3(1, 0, 0) : Vector3(0, 1, 0);
    bg.u = (ref - ref.dot(bg.n) * bg.n).normalized();
    bg.v = bg.n.cross(bg.u);
    bg.bounded = false;
    bg.tex = &spec.background.texture;
    base.push_back(bg);
    world_motion.push_back(RigidTransform::identity());
    is_static.push_back(true);
  }

  // Per-surface composed motion into the frame-2 camera.
  const int n_surf = static_cast<int>(base.size());
  std::vector<RigidTransform> to_frame2(n_surf);
  std::vector<RigidTransform> to_frame2_inv(n_surf);
  for (int i = 0; i < n_surf; ++i) {
    to_frame2[i] = compose(spec.ego_motion, world_motion[i]);
    to_frame2_inv[i] = inverse(to_frame2[i]);
  }

  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    if (!(spec.objects[i].center.z() > kMinDepth) ||
        !(act(to_frame2[i], spec.objects[i].center).z() > kMinDepth)) {
      throw InvalidInput("object sits behind the camera in one of the frames");
    }
  }

  std::vector<ViewSurface> view2(n_surf);
  for (int i = 0; i < n_surf; ++i) view2[i] = transformed(base[i], to_frame2[i]);

  const int fh = spec.full_height;
  const int fw = spec.full_width;
  const PinholeCamera& cam = spec.camera;
  for (int cy : {0, fh - 1}) {
    for (int cx : {0, fw - 1}) {
      Hit h1, h2;
      if (!raycast(base, pixel_ray(cam, cx, cy), &h1) ||
          !raycast(view2, pixel_ray(cam, cx, cy), &h2)) {
        throw InvalidInput("background plane does not cover the view");
      }
    }
  }

  GroundTruth gt;
  gt.t_ego = spec.ego_motion;
  gt.camera_full = cam;
  gt.camera = cam.cropped(spec.crop.x0, spec.crop.y0);
  gt.window = spec.crop;

  const ViewRender r1 = render_view(base, cam, fh, fw, spec.seed);
  const ViewRender r2 = render_view(view2, cam, fh, fw, spec.seed);
  gt.i1_full = r1.image;
  gt.d1_full = r1.depth;
  gt.i2_full = r2.image;
  gt.d2_full = r2.depth;

  gt.has_stereo = cam.baseline > 0;
  if (gt.has_stereo) {
    RigidTransform to_right(Eigen::Quaterniond::Identity(),
                            Vector3(-cam.baseline, 0, 0));
    std::vector<ViewSurface> right_view(n_surf);
    for (int i = 0; i < n_surf; ++i) {
      right_view[i] = transformed(base[i], to_right);
    }
    gt.right_full = render_view(right_view, cam, fh, fw, spec.seed).image;
  }

  // Analytic flow, motion field, rigidity, and full-image visibility.
  gt.f12_full = FlowField(fh, fw);
  gt.f12_full.valid.fill(0);
  gt.f21_full = FlowField(fh, fw);
  gt.f21_full.valid.fill(0);
  gt.occlusion_full = BinaryMask(fh, fw, 0);
  SE3Field field_full(fh, fw);
  field_full.valid.fill(0);
  BinaryMask rigidity_full(fh, fw, 1);

  parallel_rows(fh, [&](int y) {
    for (int x = 0; x < fw; ++x) {
      const int s1 = r1.surface(y, x);
      if (s1 >= 0) {
        const Vector3 p1 = r1.hits(y, x).t * pixel_ray(cam, x, y);
        const Vector3 p2 = act(to_frame2[s1], p1);
        field_full.transforms(y, x) = to_frame2[s1];
        field_full.valid(y, x) = 1;
        rigidity_full(y, x) = is_static[s1] ? 1 : 0;
        if (p2.z() > kMinDepth) {
          const double px = cam.fx * p2.x() / p2.z() + cam.cx;
          const double py = cam.fy * p2.y() / p2.z() + cam.cy;
          gt.f12_full.values(y, x) = {px - x, py - y};
          gt.f12_full.valid(y, x) = 1;
          if (px >= 0 && px <= fw - 1 && py >= 0 && py <= fh - 1) {
            Hit h2;
            if (raycast(view2, pixel_ray(cam, px, py), &h2) &&
                h2.t >= p2.z() - 1e-6 * (1.0 + p2.z())) {
              gt.occlusion_full(y, x) = 1;
            }
          }
        }
      }
      const int s2 = r2.surface(y, x);
      if (s2 >= 0) {
        const Vector3 p2 = r2.hits(y, x).t * pixel_ray(cam, x, y);
        const Vector3 p1 = act(to_frame2_inv[s2], p2);
        if (p1.z() > kMinDepth) {
          const double px = cam.fx * p1.x() / p1.z() + cam.cx;
          const double py = cam.fy * p1.y() / p1.z() + cam.cy;
          gt.f21_full.values(y, x) = {px - x, py - y};
          gt.f21_full.valid(y, x) = 1;
        }
      }
    }
  });

  const CropWindow& win = spec.crop;
  gt.i1 = crop_grid(gt.i1_full, win);
  gt.i2 = crop_grid(gt.i2_full, win);
  if (gt.has_stereo) gt.right = crop_grid(gt.right_full, win);
  gt.d1 = DepthMap();
  gt.d1.values = crop_grid(gt.d1_full.values, win);
  gt.d1.valid = crop_grid(gt.d1_full.valid, win);
  gt.d2.values = crop_grid(gt.d2_full.values, win);
  gt.d2.valid = crop_grid(gt.d2_full.valid, win);
  gt.field.transforms = crop_grid(field_full.transforms, win);
  gt.field.valid = crop_grid(field_full.valid, win);
  gt.rigidity = crop_grid(rigidity_full, win);
  gt.f12.values = crop_grid(gt.f12_full.values, win);
  gt.f12.valid = crop_grid(gt.f12_full.valid, win);
  gt.f21.values = crop_grid(gt.f21_full.values, win);
  gt.f21.valid = crop_grid(gt.f21_full.valid, win);
  gt.occlusion = crop_grid(gt.occlusion_full, win);
  return gt;
}

SceneFrame make_frame(const GroundTruth& gt, bool use_full) {
  SceneFrame f;
  f.i1 = gt.i1;
  f.i2 = gt.i2;
  f.d1 = gt.d1;
  f.d2 = gt.d2;
  f.camera = gt.camera;
  if (use_full) {
    f.i2_full = gt.i2_full;
    f.d2_full = gt.d2_full;
    f.window = gt.window;
  }
  if (gt.has_stereo) f.right = gt.right;
  f.require_consistent();
  return f;
}

PerturbKind perturb_kind_from_string(const std::string& name) {
  if (name == "twist_noise") return PerturbKind::kTwistNoise;
  if (name == "mask_flip") return PerturbKind::kMaskFlip;
  if (name == "depth_scale") return PerturbKind::kDepthScale;
  throw InvalidInput("unknown perturbation kind \"" + name + "\"");
}

PerturbedEstimate perturb(const GroundTruth& gt, PerturbKind kind,
                          double magnitude, std::uint64_t seed) {
  if (!(magnitude >= 0)) {
    throw InvalidInput("perturb: magnitude must be >= 0");
  }
  PerturbedEstimate out;
  out.field = gt.field;
  out.d1 = gt.d1;
  const int h = gt.rigidity.height();
  const int w = gt.rigidity.width();
  out.mask = SoftMask(h, w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.mask(y, x) = gt.rigidity(y, x);
  }
  if (magnitude == 0) return out;

  SplitMix64 rng(seed);
  switch (kind) {
    case PerturbKind::kTwistNoise:
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          Twist noise;
          for (int i = 0; i < 3; ++i) {
            noise.v[i] = magnitude * rng.next_normal();
            noise.w[i] = magnitude * rng.next_normal();
          }
          if (!out.field.valid(y, x)) continue;
          out.field.transforms(y, x) =
              compose(exp(noise), out.field.transforms(y, x));
        }
      }
      break;
    case PerturbKind::kMaskFlip:
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (rng.next_uniform() < magnitude) {
            out.mask(y, x) = 1.0 - out.mask(y, x);
          }
        }
      }
      break;
    case PerturbKind::kDepthScale: {
      const double s = 1.0 + magnitude;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out.d1.values(y, x) *= s;
      }
      break;
    }
  }
  return out;
}

SceneSpec scene_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scene spec: ") + e.what(), e.byte);
  }
  check_keys(j,
             {"seed", "full_width", "full_height", "crop", "camera",
              "ego_motion", "background", "objects"},
             "scene spec");
  SceneSpec s;
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("full_width")) s.full_width = j["full_width"].get<int>();
  if (j.contains("full_height")) s.full_height = j["full_height"].get<int>();
  if (j.contains("crop")) {
    const json& c = j["crop"];
    check_keys(c, {"x0", "y0", "width", "height"}, "crop");
    s.crop.x0 = c.value("x0", 0);
    s.crop.y0 = c.value("y0", 0);
    s.crop.width = c.value("width", 0);
    s.crop.height = c.value("height", 0);
  }
  if (j.contains("camera")) {
    const json& c = j["camera"];
    check_keys(c, {"fx", "fy", "cx", "cy", "baseline"}, "camera");
    s.camera.fx = c.value("fx", 0.0);
    s.camera.fy = c.value("fy", 0.0);
    s.camera.cx = c.value("cx", 0.0);
    s.camera.cy = c.value("cy", 0.0);
    s.camera.baseline = c.value("baseline", 0.0);
  }
  if (j.contains("ego_motion")) {
    s.ego_motion = motion_from_json(j["ego_motion"], "ego_motion");
  }
  if (j.contains("background")) {
    const json& b = j["background"];
    check_keys(b, {"normal", "distance", "texture"}, "background");
    if (b.contains("normal")) {
      s.background.normal = vec3_from_json(b["normal"], "background normal");
    }
    if (b.contains("distance")) {
      s.background.distance = b["distance"].get<double>();
    }
    if (b.contains("texture")) {
      s.background.texture = texture_from_json(b["texture"]);
    }
  }
  if (j.contains("objects")) {
    if (!j["objects"].is_array()) {
      throw ParseError("scene spec: objects must be an array");
    }
    for (const json& o : j["objects"]) {
      check_keys(o,
                 {"center", "axis_u", "axis_v", "half_u", "half_v", "motion",
                  "texture"},
                 "object");
      PatchSpec p;
      if (o.contains("center")) p.center = vec3_from_json(o["center"], "center");
      if (o.contains("axis_u")) p.axis_u = vec3_from_json(o["axis_u"], "axis_u");
      if (o.contains("axis_v")) p.axis_v = vec3_from_json(o["axis_v"], "axis_v");
      if (o.contains("half_u")) p.half_u = o["half_u"].get<double>();
      if (o.contains("half_v")) p.half_v = o["half_v"].get<double>();
      if (o.contains("motion")) {
        p.motion = motion_from_json(o["motion"], "object motion");
      }
      if (o.contains("texture")) p.texture = texture_from_json(o["texture"]);
      s.objects.push_back(p);
    }
  }
  return s;
}

std::string scene_spec_to_json(const SceneSpec& spec) {
  json j;
  j["seed"] = spec.seed;
  j["full_width"] = spec.full_width;
  j["full_height"] = spec.full_height;
  j["crop"] = {{"x0", spec.crop.x0},
               {"y0", spec.crop.y0},
               {"width", spec.crop.width},
               {"height", spec.crop.height}};
  j["camera"] = {{"fx", spec.camera.fx},
                 {"fy", spec.camera.fy},
                 {"cx", spec.camera.cx},
                 {"cy", spec.camera.cy},
                 {"baseline", spec.camera.baseline}};
  j["ego_motion"] = motion_to_json(spec.ego_motion);
  j["background"] = {
      {"normal",
       {spec.background.normal[0], spec.background.normal[1],
        spec.background.normal[2]}},
      {"distance", spec.background.distance},
      {"texture", texture_to_json(spec.background.texture)}};
  j["objects"] = json::array();
  for (const PatchSpec& p : spec.objects) {
    json o;
    o["center"] = {p.center[0], p.center[1], p.center[2]};
    o["axis_u"] = {p.axis_u[0], p.axis_u[1], p.axis_u[2]};
    o["axis_v"] = {p.axis_v[0], p.axis_v[1], p.axis_v[2]};
    o["half_u"] = p.half_u;
    o["half_v"] = p.half_v;
    o["motion"] = motion_to_json(p.motion);
    o["texture"] = texture_to_json(p.texture);
    j["objects"].push_back(o);
  }
  return j.dump(2) + "\n";
}

}  // namespace rigidflow
