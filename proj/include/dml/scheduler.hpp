#pragma once

#include <cstdint>
#include <string>

namespace dml {

enum class SchedulerKind { Constant, Linear, Dams };

std::string to_string(SchedulerKind kind);
SchedulerKind scheduler_kind_from_string(const std::string& name);

// Margin policy parameters. mu0 doubles as the fixed margin for Constant.
// threshold is the easy-triplet proportion that triggers a DAMS increment.
struct SchedulerConfig {
  SchedulerKind kind = SchedulerKind::Constant;
  double mu0 = 0.0;
  double linear_step = 0.01;   // s_l
  double dams_step = 0.01;     // s_a
  double threshold = 0.95;     // t
  double margin_cap = 2.0;     // unit-hypersphere distances never exceed 2
};

// Margins are recomputed from the counters (closed form) on every
// transition, so a trajectory never accumulates floating-point drift.
struct SchedulerState {
  SchedulerConfig config;
  std::uint64_t epochs_completed = 0;
  std::uint64_t increments_applied = 0;  // DAMS only
  double current_margin = 0.0;
};

SchedulerState scheduler_init(const SchedulerConfig& config);

// Advance once per epoch with that epoch's easy-triplet proportion. The
// returned margin governs the next epoch. DAMS increments exactly once when
// easy_proportion >= threshold.
SchedulerState scheduler_epoch_end(const SchedulerState& state, double easy_proportion);

double margin(const SchedulerState& state);

}  // namespace dml
