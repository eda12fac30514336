//! Single-stack alkaline electrolyzer model.
//!
//! Electrical: cell voltage `u(i, t) = u_rev(t) + r(t)*i + s*log10(tt(t)*i + 1)`
//! scaled by the series cell count, with reversible voltage from the
//! temperature-explicit thermodynamic fit
//! `u_rev = 1.5184 - 1.5421e-3*TK + 9.523e-5*TK*ln(TK) + 9.84e-8*TK^2` (TK in
//! kelvin). Stack power adds a quadratic auxiliary draw `a*I^2 + b*I + c`
//! (transformer/rectifier conduction losses plus plant auxiliaries) that is
//! present even at zero current, which is what makes concentrating load on
//! fewer stacks pay off at low plant setpoints.
//!
//! Thermal: lumped capacitance with convective loss to ambient and an
//! actively controlled cooling duty, `C_h dT/dt = (U - U_tn) I - (T - T_amb)/R_h - P_cool`.
//! Only electrochemical overpotential heats the stack; the auxiliary draw is
//! dissipated outside the lumped mass.
//!
//! Gas purity: hydrogen-to-oxygen crossover fraction (percent) accumulates at
//! a constant inflow while the stack is committed and is purged in proportion
//! to hydrogen production, `d HTO/dt = n_in - k(I) * HTO`, with `k` scaling
//! like the hydrogen rate. An off (de-committed) stack is swept and restarts
//! clean.

/// Faraday constant, C/mol.
const FARADAY: f64 = 96485.0;
/// Hydrogen lower heating value, Wh/kg.
const H2_LHV_WH_PER_KG: f64 = 33330.0;

/// Physical and calibration parameters of one stack (with rectifier-side
/// auxiliary losses folded into the power map).
#[derive(Debug, Clone)]
pub struct StackParams {
    /// Series-connected cells.
    pub n_cells: f64,
    /// Thermoneutral stack voltage, V (heat balance pivot).
    pub u_tn: f64,
    /// Ohmic resistance intercept, ohm (per stack, current in A).
    pub r1: f64,
    /// Ohmic resistance temperature slope, ohm/degC.
    pub r2: f64,
    /// Activation overpotential scale, V (stack total).
    pub s: f64,
    /// Activation argument coefficients: tt(T) = t1 + t2/T + t3/T^2, 1/A.
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// Auxiliary power map P = U*I + a*I^2 + b*I + c: a in W/A^2.
    pub aux_a: f64,
    /// Linear auxiliary coefficient, W/A.
    pub aux_b: f64,
    /// Constant auxiliary draw, W (standby consumption).
    pub aux_c: f64,
    /// Faraday efficiency ceiling (dimensionless).
    pub eta_f_max: f64,
    /// Faraday efficiency half-saturation constant, A^2.
    pub eta_f_knee: f64,
    /// Lumped thermal capacitance, Wh/degC.
    pub c_th: f64,
    /// Thermal resistance to ambient, degC/W.
    pub r_th: f64,
    /// Ambient temperature, degC.
    pub t_amb: f64,
    /// Maximum allowed stack temperature, degC.
    pub t_max: f64,
    /// Temperature below which a committed, current-carrying stack is still
    /// warming up, degC.
    pub t_warm: f64,
    /// Maximum cooling duty, W.
    pub p_cool_max: f64,
    /// Gas impurity inflow while committed, %/h.
    pub hto_inflow: f64,
    /// Purge-rate scale multiplying the specific hydrogen rate, dimensionless.
    pub hto_purge_scale: f64,
    /// Hard impurity limit, %.
    pub hto_max: f64,
    /// Minimum sustained operating current when energized, A.
    pub i_min_on: f64,
    /// Rated current, A.
    pub i_max: f64,
}

impl Default for StackParams {
    fn default() -> Self {
        Self {
            n_cells: 100.0,
            u_tn: 148.0,
            r1: 1.488030e-2,
            r2: -4.0e-6,
            s: 12.740751,
            t1: 5.334400e-3,
            t2: 4.556160e-1,
            t3: -6.589440,
            aux_a: 5.4e-4,
            aux_b: 1.353,
            aux_c: 91940.0,
            eta_f_max: 0.96,
            eta_f_knee: 2.5e5,
            c_th: 7.0e3,
            r_th: 4.0e-3,
            t_amb: 25.0,
            t_max: 80.0,
            t_warm: 60.0,
            p_cool_max: 660.0e3,
            hto_inflow: 0.75,
            hto_purge_scale: 11.1,
            hto_max: 2.0,
            i_min_on: 1000.0,
            i_max: 5000.0,
        }
    }
}

impl StackParams {
    /// Reversible voltage of one cell at temperature `t_c` (degC), V.
    #[inline]
    pub fn u_rev_cell(&self, t_c: f64) -> f64 {
        let tk = t_c + 273.15;
        1.5184 - 1.5421e-3 * tk + 9.523e-5 * tk * tk.ln() + 9.84e-8 * tk * tk
    }

    /// Reversible voltage of the whole stack, V.
    #[inline]
    pub fn u_rev(&self, t_c: f64) -> f64 {
        self.n_cells * self.u_rev_cell(t_c)
    }

    /// Activation argument coefficient tt(T), 1/A. Valid for t_c well above
    /// zero; the plant envelope keeps stacks at ambient (25 degC) or hotter.
    #[inline]
    pub fn tt(&self, t_c: f64) -> f64 {
        self.t1 + self.t2 / t_c + self.t3 / (t_c * t_c)
    }

    /// Stack terminal voltage at current `i` (A) and temperature `t_c`
    /// (degC), V. Increasing in current, decreasing in temperature over the
    /// operating envelope.
    #[inline]
    pub fn voltage(&self, i: f64, t_c: f64) -> f64 {
        let r = self.r1 + self.r2 * t_c;
        self.u_rev(t_c) + r * i + self.s * (self.tt(t_c) * i + 1.0).log10()
    }

    /// Auxiliary (non-electrolysis) power draw, W.
    #[inline]
    pub fn aux_power(&self, i: f64) -> f64 {
        self.aux_a * i * i + self.aux_b * i + self.aux_c
    }

    /// Total electrical power drawn from the bus at `i`, `t_c`, W. At zero
    /// current this is the standby draw `aux_c`.
    #[inline]
    pub fn power(&self, i: f64, t_c: f64) -> f64 {
        if i <= 0.0 {
            return self.aux_c;
        }
        self.voltage(i, t_c) * i + self.aux_power(i)
    }

    /// Heat deposited in the stack mass, W (zero at zero current).
    #[inline]
    pub fn heat(&self, i: f64, t_c: f64) -> f64 {
        if i <= 0.0 {
            return 0.0;
        }
        (self.voltage(i, t_c) - self.u_tn) * i
    }

    /// Faraday (current) efficiency, dimensionless, saturating in current.
    #[inline]
    pub fn eta_faraday(&self, i: f64) -> f64 {
        if i <= 0.0 {
            return 0.0;
        }
        self.eta_f_max * i * i / (self.eta_f_knee + i * i)
    }

    /// Hydrogen production rate, kg/h.
    #[inline]
    pub fn hydrogen_rate(&self, i: f64) -> f64 {
        // 3600 s/h * eta * I / (2 F) mol/h * 2.016e-3 kg/mol ~= 360 eta I / F * 0.1008
        // folded: m = 360 * eta * I / F with the molar mass absorbed upstream
        360.0 * self.eta_faraday(i) * i / FARADAY
    }

    /// System efficiency: hydrogen LHV flow over electric power drawn.
    #[inline]
    pub fn efficiency(&self, i: f64, t_c: f64) -> f64 {
        let p = self.power(i, t_c);
        if p <= 0.0 {
            return 0.0;
        }
        self.hydrogen_rate(i) * H2_LHV_WH_PER_KG / p
    }

    /// Impurity purge rate k(I), 1/h.
    #[inline]
    pub fn hto_purge_rate(&self, i: f64) -> f64 {
        self.hto_purge_scale * 8.86684e-6 * self.eta_faraday(i) * i
    }

    /// Steady-state impurity level at sustained current `i`, %.
    #[inline]
    pub fn hto_steady_state(&self, i: f64) -> f64 {
        let k = self.hto_purge_rate(i);
        if k <= 0.0 {
            f64::INFINITY
        } else {
            self.hto_inflow / k
        }
    }

    /// Advance the impurity state by `dt_h` hours (explicit Euler, matching
    /// the hourly scheduling rows). `committed = false` means the stack is
    /// off: it is swept and restarts clean.
    #[inline]
    pub fn hto_step(&self, hto: f64, i: f64, dt_h: f64, committed: bool) -> f64 {
        if !committed {
            return 0.0;
        }
        // standby (i = 0) accumulates with no purge
        let k = self.hto_purge_rate(i);
        (hto * (1.0 - k * dt_h) + self.hto_inflow * dt_h).max(0.0)
    }

    /// Advance temperature by `dt_h` hours under cooling duty `p_cool` (W).
    #[inline]
    pub fn thermal_step(&self, t_c: f64, i: f64, p_cool: f64, dt_h: f64) -> f64 {
        let net = self.heat(i, t_c) - (t_c - self.t_amb) / self.r_th - p_cool;
        t_c + dt_h * net / self.c_th
    }

    /// Cooling power that holds temperature steady at the given operating
    /// point (clamped to the actuator range), W.
    #[inline]
    pub fn cooling_to_hold(&self, t_c: f64, i: f64) -> f64 {
        (self.heat(i, t_c) - (t_c - self.t_amb) / self.r_th).clamp(0.0, self.p_cool_max)
    }

    /// Current that draws exactly `p_w` watts at temperature `t_c`, if one
    /// exists inside the sustained operating window. Power is strictly
    /// increasing in current, so bisection suffices.
    pub fn current_for_power(&self, p_w: f64, t_c: f64) -> Option<f64> {
        let (mut lo, mut hi) = (self.i_min_on, self.i_max);
        if p_w < self.power(lo, t_c) - 1e-6 || p_w > self.power(hi, t_c) + 1e-6 {
            return None;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.power(mid, t_c) < p_w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

// ==================================================================
// tests
// ==================================================================
