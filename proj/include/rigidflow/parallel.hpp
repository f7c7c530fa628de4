// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "rigidflow/common.hpp"

namespace rigidflow {

/// Number of worker threads to use, capped by the EMRMSF_THREADS
/// environment variable (unset or 0 means hardware concurrency).
int thread_budget();

/// Runs fn(row) for every row in [0, rows). Rows are distributed over
/// the thread budget; each row writes only its own outputs, so the result
/// is identical to serial execution.
void parallel_rows(int rows, const std::function<void(int)>& fn);

/// Deterministic grid reduction: per-row partial sums are computed with
/// compensated accumulation (optionally in parallel) and then combined
/// serially in row order, so the result is bit-identical for any thread
/// count.
double sum_rows(int rows, const std::function<double(int)>& row_sum);

}  // namespace rigidflow
