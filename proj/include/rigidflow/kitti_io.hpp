// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Bit-exact readers and writers for the interchange formats:
//   flow:      16-bit RGB PNG, value = round(64 f) + 2^15, valid in ch 3
//   disparity: 16-bit gray PNG, value = round(256 d), raw 0 = invalid
//   mask:      8-bit gray PNG, 0 / 255
//   float:     PFM ("Pf" gray / "PF" color), little-endian, bottom-up rows
//   poses:     text, 12 floats per line, row-major 3x4 camera-to-world
//   intrinsics: text key-value (fx fy cx cy baseline)
// Malformed files raise ParseError with a byte offset where known; values
// a format cannot represent raise InvalidInput on write, never silent
// clamping.

#pragma once

#include <string>
#include <vector>

#include "rigidflow/camera.hpp"
#include "rigidflow/image.hpp"

namespace rigidflow {

void write_flow_png(const std::string& path, const FlowField& flow);
FlowField read_flow_png(const std::string& path);

struct DisparityGrid {
  Grid<double> values;
  BinaryMask valid;
};

void write_disparity_png(const std::string& path, const Grid<double>& disp,
                         const BinaryMask& valid);
DisparityGrid read_disparity_png(const std::string& path);

void write_mask_png(const std::string& path, const BinaryMask& mask);
BinaryMask read_mask_png(const std::string& path);

/// 8-bit RGB PNG for rendered visualizations; values are clamped to [0,1]
/// and rounded to 255 levels. Reading maps back to [0,1] doubles.
void write_color_png(const std::string& path, const Image& image);
Image read_color_png(const std::string& path);

void write_pfm(const std::string& path, const Grid<double>& grid);
void write_pfm(const std::string& path, const Image& image);
Grid<double> read_pfm_gray(const std::string& path);
Image read_pfm_color(const std::string& path);

/// Camera-to-world poses. Rotation blocks more than 1e-6 from orthonormal
/// are renormalized; the count of affected lines is reported through
/// renormalized when given.
std::vector<RigidTransform> read_pose_file(const std::string& path,
                                           int* renormalized = nullptr);
void write_pose_file(const std::string& path,
                     const std::vector<RigidTransform>& poses);

PinholeCamera read_intrinsics(const std::string& path);
void write_intrinsics(const std::string& path, const PinholeCamera& cam);

}  // namespace rigidflow
