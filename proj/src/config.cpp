// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace rigidflow {
namespace {

using json = nlohmann::json;

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
      throw ParseError(std::string("unknown key \"") + item.key() + "\" in " +
                       where);
    }
  }
}

template <typename T>
void read_field(const json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

void weights_from_json(const json& j, LossWeights* w) {
  check_keys(j,
             {"alpha", "beta", "gamma", "zeta", "lambda_g", "lambda_s",
              "lambda_c", "lambda_m", "lambda_st", "lambda_sd", "lambda_sf",
              "n_iters", "normalize_depth_smoothness"},
             "weights");
  read_field(j, "alpha", &w->alpha);
  read_field(j, "beta", &w->beta);
  read_field(j, "gamma", &w->gamma);
  read_field(j, "zeta", &w->zeta);
  read_field(j, "lambda_g", &w->lambda_g);
  read_field(j, "lambda_s", &w->lambda_s);
  read_field(j, "lambda_c", &w->lambda_c);
  read_field(j, "lambda_m", &w->lambda_m);
  read_field(j, "lambda_st", &w->lambda_st);
  read_field(j, "lambda_sd", &w->lambda_sd);
  read_field(j, "lambda_sf", &w->lambda_sf);
  read_field(j, "n_iters", &w->n_iters);
  read_field(j, "normalize_depth_smoothness", &w->normalize_depth_smoothness);
}

void optimizer_from_json(const json& j, OptimizerConfig* o) {
  check_keys(j,
             {"max_steps", "step_size", "backtrack_factor", "max_backtracks",
              "tolerance", "n_iters", "detach_depth", "optimize_depth_scale",
              "fd_step"},
             "optimizer");
  read_field(j, "max_steps", &o->max_steps);
  read_field(j, "step_size", &o->step_size);
  read_field(j, "backtrack_factor", &o->backtrack_factor);
  read_field(j, "max_backtracks", &o->max_backtracks);
  read_field(j, "tolerance", &o->tolerance);
  read_field(j, "n_iters", &o->n_iters);
  read_field(j, "detach_depth", &o->detach_depth);
  read_field(j, "optimize_depth_scale", &o->optimize_depth_scale);
  read_field(j, "fd_step", &o->fd_step);
}

void eval_from_json(const json& j, EvalConfig* e) {
  check_keys(j,
             {"outlier_abs_px", "outlier_rel", "depth_cap", "depth_min",
              "median_scaling", "odometry_lengths"},
             "evaluation");
  read_field(j, "outlier_abs_px", &e->outlier_abs_px);
  read_field(j, "outlier_rel", &e->outlier_rel);
  read_field(j, "depth_cap", &e->depth_cap);
  read_field(j, "depth_min", &e->depth_min);
  read_field(j, "median_scaling", &e->median_scaling);
  read_field(j, "odometry_lengths", &e->odometry_lengths);
}

}  // namespace

void RunConfig::require_valid() const {
  if (schema_version != 1) {
    throw InvalidInput("config: unsupported schema_version");
  }
  weights.require_valid();
  optimizer.require_valid();
  if (!(outlier_p_lo >= 0) || !(outlier_p_hi <= 1) ||
      !(outlier_p_lo <= outlier_p_hi)) {
    throw InvalidInput("config: outlier quantiles must satisfy 0 <= lo <= hi <= 1");
  }
  if (!(eval.outlier_abs_px >= 0) || !(eval.outlier_rel >= 0)) {
    throw InvalidInput("config: outlier thresholds must be >= 0");
  }
  if (!(eval.depth_min > 0) || !(eval.depth_cap > eval.depth_min)) {
    throw InvalidInput("config: depth range must satisfy 0 < min < cap");
  }
  if (eval.odometry_lengths.empty()) {
    throw InvalidInput("config: odometry_lengths must be non-empty");
  }
  for (double l : eval.odometry_lengths) {
    if (!(l > 0)) throw InvalidInput("config: odometry lengths must be > 0");
  }
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what(),
                     static_cast<std::int64_t>(e.byte));
  }
  if (!j.is_object()) throw ParseError("config: document must be an object");
  check_keys(j,
             {"schema_version", "weights", "optimizer", "evaluation",
              "outlier_p_lo", "outlier_p_hi"},
             "config");
  RunConfig cfg;
  try {
    read_field(j, "schema_version", &cfg.schema_version);
    if (j.contains("weights")) weights_from_json(j["weights"], &cfg.weights);
    if (j.contains("optimizer")) {
      optimizer_from_json(j["optimizer"], &cfg.optimizer);
    }
    if (j.contains("evaluation")) eval_from_json(j["evaluation"], &cfg.eval);
    read_field(j, "outlier_p_lo", &cfg.outlier_p_lo);
    read_field(j, "outlier_p_hi", &cfg.outlier_p_hi);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  cfg.require_valid();
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["weights"] = {
      {"alpha", cfg.weights.alpha},
      {"beta", cfg.weights.beta},
      {"gamma", cfg.weights.gamma},
      {"zeta", cfg.weights.zeta},
      {"lambda_g", cfg.weights.lambda_g},
      {"lambda_s", cfg.weights.lambda_s},
      {"lambda_c", cfg.weights.lambda_c},
      {"lambda_m", cfg.weights.lambda_m},
      {"lambda_st", cfg.weights.lambda_st},
      {"lambda_sd", cfg.weights.lambda_sd},
      {"lambda_sf", cfg.weights.lambda_sf},
      {"n_iters", cfg.weights.n_iters},
      {"normalize_depth_smoothness", cfg.weights.normalize_depth_smoothness},
  };
  j["optimizer"] = {
      {"max_steps", cfg.optimizer.max_steps},
      {"step_size", cfg.optimizer.step_size},
      {"backtrack_factor", cfg.optimizer.backtrack_factor},
      {"max_backtracks", cfg.optimizer.max_backtracks},
      {"tolerance", cfg.optimizer.tolerance},
      {"n_iters", cfg.optimizer.n_iters},
      {"detach_depth", cfg.optimizer.detach_depth},
      {"optimize_depth_scale", cfg.optimizer.optimize_depth_scale},
      {"fd_step", cfg.optimizer.fd_step},
  };
  j["evaluation"] = {
      {"outlier_abs_px", cfg.eval.outlier_abs_px},
      {"outlier_rel", cfg.eval.outlier_rel},
      {"depth_cap", cfg.eval.depth_cap},
      {"depth_min", cfg.eval.depth_min},
      {"median_scaling", cfg.eval.median_scaling},
      {"odometry_lengths", cfg.eval.odometry_lengths},
  };
  j["outlier_p_lo"] = cfg.outlier_p_lo;
  j["outlier_p_hi"] = cfg.outlier_p_hi;
  return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return run_config_from_json(ss.str());
}

}  // namespace rigidflow
