// Finite-difference gradient checking. The checker evaluates the loss
// builder twice per probed coordinate (central differences) and compares
// against one reverse-mode pass.
#pragma once

#include <functional>
#include <string>

#include "pdnmt/graph.hpp"
#include "pdnmt/param_store.hpp"

namespace pdnmt {

struct GradCheckOptions {
  double eps = 1e-5;          // central-difference step, must be in (0, 1e-2]
  int samples_per_param = 2;  // coordinates probed per tensor (random subset for large ones)
  uint64_t seed = 0;          // coordinate sampling stream
  // Test hook: multiply the analytic gradient of one parameter before the
  // comparison, to confirm the checker flags a wrong gradient.
  std::string scale_param;
  double scale_factor = 1.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  int worst_index = -1;
  bool ok = false;            // loss stayed finite for every probe
  std::string error;          // offending parameter when ok is false
};

// build_loss must construct the loss for a fixed batch from the current
// store values and return the scalar loss tensor of the graph it was given.
GradCheckResult grad_check(const std::function<Tensor(Graph&)>& build_loss, ParameterStore& store,
                           const GradCheckOptions& opt = {});

}  // namespace pdnmt
