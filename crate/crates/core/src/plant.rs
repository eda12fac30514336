//! Multi-stack plant aggregation: per-stack electrical outputs, shared-bus
//! reactive power and power factor, and state integration.
//!
//! Reactive compensation is two-layered. Each rectifier carries a fixed
//! capacitor bank (`qc_stack`) switched with stack energization, sized to
//! center the per-stack power-factor valley. A common bus bank contributes
//! `qc_bus_per_stack` per energized stack and only enters the bus-level
//! power factor. Standby stacks draw auxiliary power at unity power factor
//! with their banks disconnected, so they add active power but no reactive
//! power to the bus.

use crate::rectifier::RectifierParams;
use crate::stack::StackParams;

// ==================================================================
// parameters
// ==================================================================

#[derive(Debug, Clone)]
pub struct PlantParams {
    pub n_stacks: usize,
    pub stack: StackParams,
    pub rect: RectifierParams,
    /// Per-rectifier compensation bank, var (switched with energization).
    pub qc_stack: f64,
    /// Bus compensation bank contribution per energized stack, var.
    pub qc_bus_per_stack: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            n_stacks: 2,
            stack: StackParams::default(),
            rect: RectifierParams::default(),
            qc_stack: 210.0e3,
            qc_bus_per_stack: 60.0e3,
        }
    }
}

// ==================================================================
// state and controls
// ==================================================================

/// Operating status derived from commitment, current and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// De-committed: breaker open, no draw, gas volume swept.
    Off,
    /// Committed at zero current: auxiliary draw only, impurity accumulates.
    Standby,
    /// Energized but still below working temperature.
    Startup,
    /// Energized at working temperature.
    Normal,
}

#[derive(Debug, Clone, Copy)]
pub struct StackState {
    pub committed: bool,
    /// DC current, A (0 when off or standing by).
    pub i: f64,
    /// Stack temperature, degC.
    pub t_c: f64,
    /// Gas impurity level, %.
    pub hto: f64,
}

impl StackState {
    /// Cold, de-committed stack at ambient temperature.
    pub fn cold(params: &StackParams) -> Self {
        Self { committed: false, i: 0.0, t_c: params.t_amb, hto: 0.0 }
    }
}

/// Setpoints applied to one stack over an integration interval.
#[derive(Debug, Clone, Copy)]
pub struct StackControl {
    pub committed: bool,
    /// DC current setpoint, A (forced to 0 when not committed).
    pub i: f64,
    /// Cooling duty, W.
    pub p_cool: f64,
}

impl StackControl {
    pub fn off() -> Self {
        Self { committed: false, i: 0.0, p_cool: 0.0 }
    }
}

// ==================================================================
// outputs
// ==================================================================

#[derive(Debug, Clone, Copy)]
pub struct StackOutput {
    pub status: Status,
    /// Terminal voltage, V (0 unless energized).
    pub u: f64,
    /// Active power drawn, W.
    pub p_w: f64,
    /// Net reactive power after the rectifier bank, var (0 unless energized).
    pub q_var: f64,
    /// Stack-level power factor (rectifier bank only).
    pub pf: f64,
    /// Hydrogen production, kg/h.
    pub m_kg_h: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BusOutput {
    pub p_w: f64,
    /// Net reactive power including the bus bank, var.
    pub q_var: f64,
    /// Bus power factor (1.0 when nothing draws power).
    pub pf: f64,
    pub m_kg_h: f64,
    pub n_committed: usize,
    pub n_energized: usize,
    /// True when no stack is committed: the plant presents no load.
    pub all_off: bool,
}

impl PlantParams {
    /// Status classification used everywhere (scheduler, dispatch, reports).
    pub fn status(&self, committed: bool, i: f64, t_c: f64) -> Status {
        if !committed {
            Status::Off
        } else if i <= 0.0 {
            Status::Standby
        } else if t_c < self.stack.t_warm {
            Status::Startup
        } else {
            Status::Normal
        }
    }

    /// Electrical and production outputs of one stack at its current state.
    pub fn stack_output(&self, st: &StackState) -> StackOutput {
        let status = self.status(st.committed, st.i, st.t_c);
        match status {
            Status::Off => StackOutput {
                status,
                u: 0.0,
                p_w: 0.0,
                q_var: 0.0,
                pf: 1.0,
                m_kg_h: 0.0,
            },
            Status::Standby => StackOutput {
                status,
                u: 0.0,
                p_w: self.stack.aux_c,
                q_var: 0.0,
                pf: 1.0,
                m_kg_h: 0.0,
            },
            Status::Startup | Status::Normal => {
                let u = self.stack.voltage(st.i, st.t_c);
                let p = self.stack.power(st.i, st.t_c);
                let q = self.rect.reactive_raw(p, u) - self.qc_stack;
                StackOutput {
                    status,
                    u,
                    p_w: p,
                    q_var: q,
                    pf: RectifierParams::power_factor(p, q),
                    m_kg_h: self.stack.hydrogen_rate(st.i),
                }
            }
        }
    }

    /// Aggregate the shared bus over all stacks.
    pub fn bus_output(&self, states: &[StackState]) -> BusOutput {
        let mut p = 0.0;
        let mut q = 0.0;
        let mut m = 0.0;
        let mut n_committed = 0;
        let mut n_energized = 0;
        for st in states {
            let out = self.stack_output(st);
            p += out.p_w;
            m += out.m_kg_h;
            if st.committed {
                n_committed += 1;
            }
            if matches!(out.status, Status::Startup | Status::Normal) {
                n_energized += 1;
                q += out.q_var - self.qc_bus_per_stack;
            }
        }
        BusOutput {
            p_w: p,
            q_var: q,
            pf: RectifierParams::power_factor(p, q),
            m_kg_h: m,
            n_committed,
            n_energized,
            all_off: n_committed == 0,
        }
    }

    /// Convenience: bus power factor of an energized current split at a
    /// common temperature.
    pub fn bus_pf_at(&self, currents: &[f64], t_c: f64) -> f64 {
        let states: Vec<StackState> = currents
            .iter()
            .map(|&i| StackState { committed: true, i, t_c, hto: 0.0 })
            .collect();
        self.bus_output(&states).pf
    }

    /// Advance all stack states by `dt_h` hours under the given controls.
    /// Controls are applied at the start of the interval (commitment and
    /// current step immediately; temperature and impurity integrate).
    pub fn step(&self, states: &mut [StackState], controls: &[StackControl], dt_h: f64) {
        assert_eq!(states.len(), controls.len());
        for (st, ctl) in states.iter_mut().zip(controls) {
            st.committed = ctl.committed;
            st.i = if ctl.committed { ctl.i.max(0.0) } else { 0.0 };
            let p_cool = ctl.p_cool.clamp(0.0, self.stack.p_cool_max);
            st.t_c = self.stack.thermal_step(st.t_c, st.i, p_cool, dt_h);
            st.hto = self.stack.hto_step(st.hto, st.i, dt_h, st.committed);
        }
    }
}

// ==================================================================
// tests
// ==================================================================

#[cfg(test)]
mod tests {
    use super::*;

    fn plant() -> PlantParams {
        PlantParams::default()
    }

    fn energized(i: f64, t_c: f64) -> StackState {
        StackState { committed: true, i, t_c, hto: 0.0 }
    }

    #[test]
    fn net_reactive_power_envelope() {
        let p = plant();
        // net reactive power after the rectifier bank spans the design band
        let q_min = p.stack_output(&energized(1000.0, 30.0)).q_var;
        let q_max = p.stack_output(&energized(5000.0, 80.0)).q_var;
        assert!((q_min - 0.0896e6).abs() < 2e3, "q_min {q_min}");
        assert!((q_max - 0.5709e6).abs() < 2e3, "q_max {q_max}");
        // corners stay inside the band
        for (i, t) in [(1000.0, 80.0), (5000.0, 30.0), (2500.0, 55.0)] {
            let q = p.stack_output(&energized(i, t)).q_var;
            assert!(q > q_min - 1e3 && q < q_max + 1e3, "({i},{t}) -> {q}");
        }
    }

    #[test]
    fn stack_pf_valley_is_single_dipped_and_nested() {
        let p = plant();
        // hot trace: one interior minimum around 2566 A at ~0.855
        let pf_at = |i: f64, t: f64| p.stack_output(&energized(i, t)).pf;
        let mut min_i = 0.0;
        let mut min_pf = 1.0;
        for k in 0..=400 {
            let i = 1000.0 + 4000.0 * k as f64 / 400.0;
            let v = pf_at(i, 80.0);
            if v < min_pf {
                min_pf = v;
                min_i = i;
            }
        }
        assert!((min_pf - 0.8550).abs() < 1e-3, "valley depth {min_pf}");
        assert!((min_i - 2566.0).abs() < 60.0, "valley position {min_i}");
        assert!(min_i > 1100.0 && min_i < 4900.0, "minimum must be interior");

        // the sub-0.9 current window shrinks strictly as the stack cools
        let window = |t: f64| {
            let mut lo = f64::NAN;
            let mut hi = f64::NAN;
            for k in 0..=4000 {
                let i = 1000.0 + 4000.0 * k as f64 / 4000.0;
                if pf_at(i, t) < 0.9 {
                    if lo.is_nan() {
                        lo = i;
                    }
                    hi = i;
                }
            }
            (lo, hi)
        };
        let (lo80, hi80) = window(80.0);
        let (lo40, hi40) = window(40.0);
        assert!((lo80 - 1232.0).abs() < 10.0 && (hi80 - 5000.0).abs() < 10.0, "({lo80},{hi80})");
        assert!(lo40 > lo80 && hi40 < hi80, "40 degC window must nest strictly");
        assert!((lo40 - 1405.0).abs() < 10.0 && (hi40 - 4510.0).abs() < 10.0, "({lo40},{hi40})");
    }

    #[test]
    fn bus_pf_anchor_points() {
        let p = plant();
        // equal medium split, hot plant: below the 0.9 threshold
        assert!((p.bus_pf_at(&[3140.0, 3140.0], 75.0) - 0.8931).abs() < 1e-3);
        // asymmetric splits at the same total power climb back above 0.9
        assert!((p.bus_pf_at(&[4400.0, 1400.0], 80.0) - 0.9166).abs() < 1e-3);
        assert!((p.bus_pf_at(&[4000.0, 2530.0], 80.0) - 0.8978).abs() < 1e-3);
        // cold equal split at partial load
        assert!((p.bus_pf_at(&[2350.0, 2350.0], 30.0) - 0.9146).abs() < 1e-3);
        // full fleet at the 1 MW-per-stack duty point
        assert!((p.bus_pf_at(&[4390.0, 4390.0], 80.0) - 0.9049).abs() < 1e-3);
    }

    #[test]
    fn status_classification() {
        let p = plant();
        assert_eq!(p.status(false, 0.0, 25.0), Status::Off);
        assert_eq!(p.status(true, 0.0, 25.0), Status::Standby);
        assert_eq!(p.status(true, 2000.0, 45.0), Status::Startup);
        assert_eq!(p.status(true, 2000.0, 75.0), Status::Normal);
    }

    #[test]
    fn standby_draws_aux_power_at_unity_pf() {
        let p = plant();
        let st = StackState { committed: true, i: 0.0, t_c: 50.0, hto: 0.5 };
        let out = p.stack_output(&st);
        assert_eq!(out.status, Status::Standby);
        assert_eq!(out.p_w, p.stack.aux_c);
        assert_eq!(out.q_var, 0.0);
        assert_eq!(out.pf, 1.0);
        // bus with one standby and one energized stack
        let bus = p.bus_output(&[st, energized(3000.0, 75.0)]);
        assert_eq!(bus.n_committed, 2);
        assert_eq!(bus.n_energized, 1);
        assert!(bus.p_w > p.stack.aux_c);
    }

    #[test]
    fn all_off_bus_is_flagged_with_unity_pf() {
        let p = plant();
        let states = vec![StackState::cold(&p.stack); 2];
        let bus = p.bus_output(&states);
        assert!(bus.all_off);
        assert_eq!(bus.pf, 1.0);
        assert_eq!(bus.p_w, 0.0);
    }

    #[test]
    fn step_integrates_temperature_and_impurity() {
        let p = plant();
        let mut states = vec![StackState::cold(&p.stack); 2];
        let on = StackControl { committed: true, i: 5000.0, p_cool: 0.0 };
        // stack 0 runs, stack 1 stays off
        for _ in 0..8 {
            p.step(&mut states, &[on, StackControl::off()], 0.25);
        }
        assert!(states[0].t_c > 80.0, "running stack warms: {}", states[0].t_c);
        assert!(states[0].hto > 0.0);
        assert!((states[1].t_c - p.stack.t_amb).abs() < 1e-9, "off stack stays ambient");
        assert_eq!(states[1].hto, 0.0);
        // de-commit: gas volume swept, temperature decays toward ambient
        let t_hot = states[0].t_c;
        p.step(&mut states, &[StackControl::off(), StackControl::off()], 0.25);
        assert_eq!(states[0].hto, 0.0);
        assert!(states[0].t_c < t_hot);
    }
}
