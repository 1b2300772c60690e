//! Adaptive threshold control.

mod pid;
mod schedule;
mod tuning;

pub use pid::{
    compute_error, pid_update, update_setpoint, update_threshold, PidGains, PidState, Setpoint, ThresholdController,
    DEFAULT_INTEGRAL_LIMIT, DEFAULT_SETPOINT_WINDOW,
};
pub use schedule::{builtin_schedule, schedule_gains, GainSchedule, SCHEDULED_AXES};
pub use tuning::{performance_index, zn_gains, Oscillation, Plant, Tuning, ZieglerNichols};
