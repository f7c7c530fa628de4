// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface. run_cli is the whole program behind the binary;
// tests call it in-process. Exit codes: 0 success, 1 usage error, 2 data
// error (bad files or values), 3 numeric failure.

#pragma once

#include <string>
#include <utility>

#include "rigidflow/frame.hpp"
#include "rigidflow/motion_field.hpp"

namespace rigidflow {

int run_cli(int argc, const char* const* argv);

/// Loads a frame manifest (JSON naming the image/depth/intrinsics files,
/// optional full-image variants, crop window, stereo view). Relative paths
/// resolve against the manifest's directory.
SceneFrame load_frame_manifest(const std::string& path);

/// Loads an estimate manifest (twist and mask files) as a per-pixel field.
std::pair<SE3Field, SoftMask> load_estimate_manifest(const std::string& path);

/// Writes <prefix>_twist_v.pfm / <prefix>_twist_w.pfm / <prefix>_mask.pfm
/// plus <prefix>.json into dir and returns the manifest path.
std::string write_estimate_files(const std::string& dir,
                                 const std::string& prefix,
                                 const SE3Field& field, const SoftMask& mask);

}  // namespace rigidflow
