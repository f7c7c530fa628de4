// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/cli.hpp"

int main(int argc, char** argv) { return rigidflow::run_cli(argc, argv); }
