// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/kitti_io.hpp"

#include <png.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace rigidflow {
namespace {

// libpng plumbing ----------------------------------------------------------

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
  *static_cast<std::string*>(png_get_error_ptr(png)) = msg;
  longjmp(png_jmpbuf(png), 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct PngImage {
  int height = 0;
  int width = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> data;  // row-major, interleaved channels
};

PngImage read_png(const std::string& path, int want_depth, int want_channels) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw ParseError("cannot open \"" + path + "\" for reading");

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ParseError(path + ": not a PNG file (bad signature)", 0);
  }

  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                           png_error_handler,
                                           png_warning_handler);
  if (!png) throw ParseError(path + ": libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ParseError(path + ": libpng init failed");
  }

  PngImage out;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> raw;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path + ": " + err);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  out.channels = png_get_channels(png, info);

  if (out.bit_depth != want_depth) {
    const int got = out.bit_depth;
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path + ": expected " + std::to_string(want_depth) +
                     "-bit PNG, got " + std::to_string(got) + "-bit");
  }
  if (out.channels != want_channels || color == PNG_COLOR_TYPE_PALETTE) {
    const int got = out.channels;
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path + ": expected " + std::to_string(want_channels) +
                     " channels, got " + std::to_string(got));
  }

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  raw.resize(row_bytes * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = raw.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n =
      static_cast<std::size_t>(out.height) * out.width * out.channels;
  out.data.resize(n);
  if (want_depth == 16) {
    // PNG stores 16-bit samples big-endian.
    for (std::size_t i = 0; i < n; ++i) {
      out.data[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.data[i] = raw[i];
  }
  return out;
}

void write_png(const std::string& path, int height, int width, int channels,
               int bit_depth, const std::vector<std::uint16_t>& data) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw InvalidInput("cannot open \"" + path + "\" for writing");

  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err,
                                            png_error_handler,
                                            png_warning_handler);
  if (!png) throw InvalidInput(path + ": libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw InvalidInput(path + ": libpng init failed");
  }

  const std::size_t n =
      static_cast<std::size_t>(height) * width * channels;
  std::vector<unsigned char> raw;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InvalidInput(path + ": " + err);
  }

  png_init_io(png, file.get());
  // Fixed settings so identical inputs produce identical bytes.
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, width, height, bit_depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t sample_bytes = bit_depth == 16 ? 2 : 1;
  raw.resize(n * sample_bytes);
  if (bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      raw[2 * i] = static_cast<unsigned char>(data[i] >> 8);
      raw[2 * i + 1] = static_cast<unsigned char>(data[i] & 0xff);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      raw[i] = static_cast<unsigned char>(data[i] & 0xff);
    }
  }
  const std::size_t row_bytes =
      static_cast<std::size_t>(width) * channels * sample_bytes;
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = raw.data() + y * row_bytes;
  png_write_image(png, rows.data());
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

// PFM plumbing --------------------------------------------------------------

std::string next_token(std::istream& in, const std::string& path) {
  std::string tok;
  if (!(in >> tok)) {
    throw ParseError(path + ": truncated PFM header",
                     static_cast<std::int64_t>(in.tellg()));
  }
  return tok;
}

void write_pfm_impl(const std::string& path, int height, int width,
                    int channels, const std::vector<float>& top_down) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open \"" + path + "\" for writing");
  out << (channels == 3 ? "PF" : "Pf") << "\n"
      << width << " " << height << "\n"
      << "-1\n";
  // PFM rows run bottom-up.
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  for (int y = height - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(top_down.data() + y * row),
              static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!out) throw InvalidInput(path + ": write failed");
}

std::vector<float> read_pfm_impl(const std::string& path, int* height,
                                 int* width, int expect_channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open \"" + path + "\" for reading");

  const std::string magic = next_token(in, path);
  int channels;
  if (magic == "PF") {
    channels = 3;
  } else if (magic == "Pf") {
    channels = 1;
  } else {
    throw ParseError(path + ": not a PFM file (bad magic \"" + magic + "\")",
                     0);
  }
  if (channels != expect_channels) {
    throw ParseError(path + ": expected " + std::to_string(expect_channels) +
                     "-channel PFM, got " + std::to_string(channels));
  }

  const std::string ws = next_token(in, path);
  const std::string hs = next_token(in, path);
  const std::string ss = next_token(in, path);
  int w, h;
  double scale;
  try {
    w = std::stoi(ws);
    h = std::stoi(hs);
    scale = std::stod(ss);
  } catch (const std::exception&) {
    throw ParseError(path + ": malformed PFM header",
                     static_cast<std::int64_t>(in.tellg()));
  }
  if (w <= 0 || h <= 0) {
    throw ParseError(path + ": non-positive PFM dimensions",
                     static_cast<std::int64_t>(in.tellg()));
  }
  if (scale >= 0) {
    throw ParseError(path + ": big-endian PFM is not supported",
                     static_cast<std::int64_t>(in.tellg()));
  }
  in.get();  // single whitespace byte after the scale line

  const std::size_t row = static_cast<std::size_t>(w) * channels;
  std::vector<float> top_down(row * h);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(top_down.data() + y * row),
            static_cast<std::streamsize>(row * sizeof(float)));
    if (!in) {
      throw ParseError(path + ": truncated PFM pixel data",
                       static_cast<std::int64_t>(in.tellg()));
    }
  }
  *height = h;
  *width = w;
  return top_down;
}

}  // namespace

void write_flow_png(const std::string& path, const FlowField& flow) {
  const int h = flow.height();
  const int w = flow.width();
  std::vector<std::uint16_t> data(static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
      if (!flow.valid(y, x)) {
        data[i] = 1 << 15;
        data[i + 1] = 1 << 15;
        data[i + 2] = 0;
        continue;
      }
      for (int c = 0; c < 2; ++c) {
        const double f = flow.values(y, x)[c];
        if (!is_finite(f)) {
          throw InvalidInput(path + ": non-finite flow value");
        }
        const double raw = std::round(64.0 * f) + 32768.0;
        if (raw < 0 || raw > 65535) {
          throw InvalidInput(path + ": flow value " + std::to_string(f) +
                             " px does not fit the 16-bit encoding");
        }
        data[i + c] = static_cast<std::uint16_t>(raw);
      }
      data[i + 2] = 1;
    }
  }
  write_png(path, h, w, 3, 16, data);
}

FlowField read_flow_png(const std::string& path) {
  const PngImage png = read_png(path, 16, 3);
  FlowField flow(png.height, png.width);
  flow.valid.fill(0);
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      const std::size_t i =
          (static_cast<std::size_t>(y) * png.width + x) * 3;
      if (!png.data[i + 2]) continue;
      flow.values(y, x) = {(png.data[i] - 32768.0) / 64.0,
                           (png.data[i + 1] - 32768.0) / 64.0};
      flow.valid(y, x) = 1;
    }
  }
  return flow;
}

void write_disparity_png(const std::string& path, const Grid<double>& disp,
                         const BinaryMask& valid) {
  const int h = disp.height();
  const int w = disp.width();
  require_same_shape(h, w, valid.height(), valid.width(),
                     "disparity vs validity");
  std::vector<std::uint16_t> data(static_cast<std::size_t>(h) * w, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!valid(y, x)) continue;
      const double d = disp(y, x);
      if (!is_finite(d)) throw InvalidInput(path + ": non-finite disparity");
      const double raw = std::round(256.0 * d);
      if (raw < 1 || raw > 65535) {
        throw InvalidInput(path + ": disparity " + std::to_string(d) +
                           " px does not fit the 16-bit encoding");
      }
      data[static_cast<std::size_t>(y) * w + x] =
          static_cast<std::uint16_t>(raw);
    }
  }
  write_png(path, h, w, 1, 16, data);
}

DisparityGrid read_disparity_png(const std::string& path) {
  const PngImage png = read_png(path, 16, 1);
  DisparityGrid out{Grid<double>(png.height, png.width, 0.0),
                    BinaryMask(png.height, png.width, 0)};
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      const std::uint16_t raw =
          png.data[static_cast<std::size_t>(y) * png.width + x];
      if (raw == 0) continue;  // raw 0 marks an invalid pixel
      out.values(y, x) = raw / 256.0;
      out.valid(y, x) = 1;
    }
  }
  return out;
}

void write_mask_png(const std::string& path, const BinaryMask& mask) {
  const int h = mask.height();
  const int w = mask.width();
  std::vector<std::uint16_t> data(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      data[static_cast<std::size_t>(y) * w + x] = mask(y, x) ? 255 : 0;
    }
  }
  write_png(path, h, w, 1, 8, data);
}

BinaryMask read_mask_png(const std::string& path) {
  const PngImage png = read_png(path, 8, 1);
  BinaryMask mask(png.height, png.width, 0);
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      mask(y, x) =
          png.data[static_cast<std::size_t>(y) * png.width + x] > 127 ? 1 : 0;
    }
  }
  return mask;
}

void write_color_png(const std::string& path, const Image& image) {
  const int h = image.height();
  const int w = image.width();
  std::vector<std::uint16_t> data(static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d& v = image(y, x);
      for (int c = 0; c < 3; ++c) {
        if (!is_finite(v[c])) {
          throw InvalidInput(path + ": non-finite pixel value");
        }
        const double clamped = std::min(1.0, std::max(0.0, v[c]));
        data[(static_cast<std::size_t>(y) * w + x) * 3 + c] =
            static_cast<std::uint16_t>(std::lround(clamped * 255.0));
      }
    }
  }
  write_png(path, h, w, 3, 8, data);
}

Image read_color_png(const std::string& path) {
  const PngImage png = read_png(path, 8, 3);
  Image image(png.height, png.width, Eigen::Vector3d::Zero());
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * png.width + x) * 3;
      image(y, x) = Eigen::Vector3d(png.data[i] / 255.0,
                                    png.data[i + 1] / 255.0,
                                    png.data[i + 2] / 255.0);
    }
  }
  return image;
}

void write_pfm(const std::string& path, const Grid<double>& grid) {
  const int h = grid.height();
  const int w = grid.width();
  std::vector<float> data(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      data[static_cast<std::size_t>(y) * w + x] =
          static_cast<float>(grid(y, x));
    }
  }
  write_pfm_impl(path, h, w, 1, data);
}

void write_pfm(const std::string& path, const Image& image) {
  const int h = image.height();
  const int w = image.width();
  std::vector<float> data(static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
      for (int c = 0; c < 3; ++c) {
        data[i + c] = static_cast<float>(image(y, x)[c]);
      }
    }
  }
  write_pfm_impl(path, h, w, 3, data);
}

Grid<double> read_pfm_gray(const std::string& path) {
  int h, w;
  const std::vector<float> data = read_pfm_impl(path, &h, &w, 1);
  Grid<double> grid(h, w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      grid(y, x) = data[static_cast<std::size_t>(y) * w + x];
    }
  }
  return grid;
}

Image read_pfm_color(const std::string& path) {
  int h, w;
  const std::vector<float> data = read_pfm_impl(path, &h, &w, 3);
  Image image(h, w, Eigen::Vector3d::Zero());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
      image(y, x) = {data[i], data[i + 1], data[i + 2]};
    }
  }
  return image;
}

std::vector<RigidTransform> read_pose_file(const std::string& path,
                                           int* renormalized) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open \"" + path + "\" for reading");
  std::vector<RigidTransform> poses;
  if (renormalized) *renormalized = 0;
  std::string line;
  int lineno = 0;
  std::int64_t offset = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::int64_t line_start = offset;
    offset += static_cast<std::int64_t>(line.size()) + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double v[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ls >> v[i])) {
        throw ParseError(path + ": line " + std::to_string(lineno) +
                             ": expected 12 numbers",
                         line_start);
      }
    }
    double extra;
    if (ls >> extra) {
      throw ParseError(path + ": line " + std::to_string(lineno) +
                           ": more than 12 numbers",
                       line_start);
    }
    Matrix3 r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    const Vector3 t(v[3], v[7], v[11]);
    if ((r * r.transpose() - Matrix3::Identity()).norm() > 1e-6) {
      if (renormalized) ++(*renormalized);
    }
    // from_rotation_matrix snaps to the nearest quaternion rotation.
    poses.push_back(RigidTransform::from_rotation_matrix(r, t));
  }
  return poses;
}

void write_pose_file(const std::string& path,
                     const std::vector<RigidTransform>& poses) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open \"" + path + "\" for writing");
  char buf[32];
  for (const RigidTransform& p : poses) {
    const Matrix3 r = p.rotation_matrix();
    const Vector3& t = p.translation();
    double v[12] = {r(0, 0), r(0, 1), r(0, 2), t(0), r(1, 0), r(1, 1),
                    r(1, 2), t(1),    r(2, 0), r(2, 1), r(2, 2), t(2)};
    for (int i = 0; i < 12; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
      out << buf << (i == 11 ? "\n" : " ");
    }
  }
  if (!out) throw InvalidInput(path + ": write failed");
}

PinholeCamera read_intrinsics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open \"" + path + "\" for reading");
  PinholeCamera cam{0, 0, 0, 0, 0};
  bool saw_fx = false, saw_fy = false, saw_cx = false, saw_cy = false;
  std::string key;
  while (in >> key) {
    double value;
    if (!(in >> value)) {
      throw ParseError(path + ": intrinsics key \"" + key + "\" has no value");
    }
    if (key == "fx") {
      cam.fx = value;
      saw_fx = true;
    } else if (key == "fy") {
      cam.fy = value;
      saw_fy = true;
    } else if (key == "cx") {
      cam.cx = value;
      saw_cx = true;
    } else if (key == "cy") {
      cam.cy = value;
      saw_cy = true;
    } else if (key == "baseline") {
      cam.baseline = value;
    } else {
      throw ParseError(path + ": unknown intrinsics key \"" + key + "\"");
    }
  }
  if (!saw_fx || !saw_fy || !saw_cx || !saw_cy) {
    throw ParseError(path + ": intrinsics must define fx, fy, cx, cy");
  }
  cam.require_valid();
  return cam;
}

void write_intrinsics(const std::string& path, const PinholeCamera& cam) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open \"" + path + "\" for writing");
  char buf[32];
  const auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << key << " " << buf << "\n";
  };
  line("fx", cam.fx);
  line("fy", cam.fy);
  line("cx", cam.cx);
  line("cy", cam.cy);
  line("baseline", cam.baseline);
  if (!out) throw InvalidInput(path + ": write failed");
}

}  // namespace rigidflow
