#include "dml/scheduler.hpp"

#include <algorithm>
#include <cmath>

#include "dml/errors.hpp"

namespace dml {

namespace {

void validate(const SchedulerConfig& c) {
  if (!(c.mu0 >= 0.0) || !std::isfinite(c.mu0))
    throw ConfigError("scheduler: mu0 must be finite and >= 0");
  if (!(c.linear_step >= 0.0) || !std::isfinite(c.linear_step))
    throw ConfigError("scheduler: linear_step must be finite and >= 0");
  if (!(c.dams_step >= 0.0) || !std::isfinite(c.dams_step))
    throw ConfigError("scheduler: dams_step must be finite and >= 0");
  if (!(c.threshold >= 0.0 && c.threshold <= 1.0))
    throw ConfigError("scheduler: threshold must lie in [0,1]");
  if (!(c.margin_cap >= c.mu0))
    throw ConfigError("scheduler: margin_cap must be >= mu0");
}

double closed_form_margin(const SchedulerConfig& c, std::uint64_t epochs,
                          std::uint64_t increments) {
  switch (c.kind) {
    case SchedulerKind::Constant:
      return c.mu0;
    case SchedulerKind::Linear:
      return std::min(c.margin_cap, c.mu0 + c.linear_step * static_cast<double>(epochs));
    case SchedulerKind::Dams:
      return std::min(c.margin_cap, c.mu0 + c.dams_step * static_cast<double>(increments));
  }
  throw ConfigError("scheduler: unknown kind");
}

}  // namespace

std::string to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::Constant: return "constant";
    case SchedulerKind::Linear: return "linear";
    case SchedulerKind::Dams: return "dams";
  }
  return "unknown";
}

SchedulerKind scheduler_kind_from_string(const std::string& name) {
  if (name == "constant") return SchedulerKind::Constant;
  if (name == "linear") return SchedulerKind::Linear;
  if (name == "dams") return SchedulerKind::Dams;
  throw ConfigError("scheduler: unknown kind '" + name +
                    "' (expected constant, linear, or dams)");
}

SchedulerState scheduler_init(const SchedulerConfig& config) {
  validate(config);
  SchedulerState state;
  state.config = config;
  state.current_margin = closed_form_margin(config, 0, 0);
  return state;
}

SchedulerState scheduler_epoch_end(const SchedulerState& state, double easy_proportion) {
  if (!(easy_proportion >= 0.0 && easy_proportion <= 1.0))
    throw ValueError("scheduler_epoch_end: easy_proportion must lie in [0,1]");
  SchedulerState next = state;
  next.epochs_completed += 1;
  if (state.config.kind == SchedulerKind::Dams &&
      easy_proportion >= state.config.threshold)
    next.increments_applied += 1;
  next.current_margin = closed_form_margin(next.config, next.epochs_completed,
                                           next.increments_applied);
  return next;
}

double margin(const SchedulerState& state) { return state.current_margin; }

}  // namespace dml
