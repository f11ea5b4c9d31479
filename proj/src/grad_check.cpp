#include "pdnmt/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "pdnmt/error.hpp"
#include "pdnmt/rng.hpp"

namespace pdnmt {

GradCheckResult grad_check(const std::function<Tensor(Graph&)>& build_loss, ParameterStore& store,
                           const GradCheckOptions& opt) {
  if (!(opt.eps > 0.0 && opt.eps <= 1e-2))
    throw ConfigError(strfmt("grad_check: eps must be in (0, 1e-2], got %g", opt.eps));
  if (opt.samples_per_param < 1)
    throw ConfigError("grad_check: samples_per_param must be at least 1");

  GradCheckResult result;

  Graph g;
  const Tensor loss = build_loss(g);
  if (!loss.all_finite()) {
    result.error = "non-finite loss on unperturbed parameters";
    return result;
  }
  GradientMap analytic = g.backward(loss, store);
  if (!opt.scale_param.empty()) {
    auto it = analytic.find(opt.scale_param);
    if (it == analytic.end()) throw ConfigError("grad_check: unknown scale_param " + opt.scale_param);
    for (double& v : it->second.values) v *= opt.scale_factor;
  }

  auto eval = [&]() {
    Graph fresh;
    return build_loss(fresh).item();
  };

  for (const auto& name : store.names()) {
    Tensor& param = store.at(name);
    const int64_t n = param.numel();
    if (n == 0) continue;
    Rng rng(opt.seed, fnv1a(name) ^ 0x5eedull);
    const int probes = static_cast<int>(std::min<int64_t>(n, opt.samples_per_param));
    for (int s = 0; s < probes; ++s) {
      const int64_t idx = n <= opt.samples_per_param
                              ? s
                              : static_cast<int64_t>(rng.below(static_cast<uint32_t>(n)));
      const double saved = param.values[static_cast<size_t>(idx)];
      param.values[static_cast<size_t>(idx)] = saved + opt.eps;
      const double up = eval();
      param.values[static_cast<size_t>(idx)] = saved - opt.eps;
      const double down = eval();
      param.values[static_cast<size_t>(idx)] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        result.ok = false;
        result.error = "non-finite loss while probing " + name;
        return result;
      }
      const double numeric = (up - down) / (2.0 * opt.eps);
      const double analytic_v = analytic.at(name).values[static_cast<size_t>(idx)];
      const double denom = std::max({std::fabs(analytic_v), std::fabs(numeric), 1e-8});
      const double rel = std::fabs(analytic_v - numeric) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = name;
        result.worst_index = static_cast<int>(idx);
      }
    }
  }
  result.ok = true;
  return result;
}

}  // namespace pdnmt
