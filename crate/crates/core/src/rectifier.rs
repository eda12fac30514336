//! Thyristor rectifier electrical model (24-pulse, phase-controlled).
//!
//! The DC terminal voltage fixes the firing angle through
//! `U = U_di0 * cos(alpha)`, folded into the calibrated map
//! `alpha = arccos(c_alpha * U)`. Commutation overlap and the displacement
//! phase are linearized in `alpha`. Reactive power has a displacement
//! component proportional to `sin(phi)` and a distortion component from
//! harmonic currents; both scale with `P/U`, so the whole reactive chain
//! reduces to a factor `q_factor(U)` multiplying active power:
//!
//! `Q_raw = hypot(c_qs * sin(phi(U)), c_qd) * P / U = q_factor(U) * P`
//!
//! `q_factor` falls as voltage rises (smaller firing angle), which is why
//! running stacks hot (low voltage) hurts the power factor and cooling them
//! is a usable power-factor lever.

/// Converter constants. The printed map coefficients (`c_alpha`, `c_qs`,
/// `c_qd`, linear phase and overlap) are the operational calibration; the
/// grid voltage and turns constant are retained to cross-check that the
/// calibration is self-consistent.
#[derive(Debug, Clone)]
pub struct RectifierParams {
    /// Firing-angle map: alpha = arccos(c_alpha * U), 1/V.
    pub c_alpha: f64,
    /// Overlap angle linearization gamma = g0 - g1 * alpha, rad.
    pub g0: f64,
    pub g1: f64,
    /// Displacement phase linearization phi = p0 * alpha + p1, rad.
    pub p0: f64,
    pub p1: f64,
    /// Displacement reactive scale, V (no-load DC voltage).
    pub c_qs: f64,
    /// Distortion reactive scale, V.
    pub c_qd: f64,
    /// Distortion current as a fraction of the fundamental.
    pub c_dist: f64,
    /// Line-to-line grid voltage at the converter transformer, V.
    pub u_grid: f64,
    /// Transformer/bridge turns constant relating U_di0 = 2.44 u_grid / k.
    pub k_turns: f64,
}

impl Default for RectifierParams {
    fn default() -> Self {
        Self {
            c_alpha: 4.07e-3,
            g0: 0.5065,
            g1: 0.6738,
            p0: 0.6339,
            p1: 0.2756,
            c_qs: 245.525,
            c_qd: 18.716,
            c_dist: 0.076324,
            u_grid: 10.0e3,
            k_turns: 99.378,
        }
    }
}

impl RectifierParams {
    /// Firing angle for DC terminal voltage `u`, rad.
    #[inline]
    pub fn firing_angle(&self, u: f64) -> f64 {
        (self.c_alpha * u).clamp(-1.0, 1.0).acos()
    }

    /// Commutation overlap angle at firing angle `alpha`, rad.
    #[inline]
    pub fn overlap_angle(&self, alpha: f64) -> f64 {
        self.g0 - self.g1 * alpha
    }

    /// Linearized displacement phase at firing angle `alpha`, rad.
    #[inline]
    pub fn phase_linear(&self, alpha: f64) -> f64 {
        self.p0 * alpha + self.p1
    }

    /// Exact displacement-factor cosine, averaging the conduction interval:
    /// cos(phi) = (cos(alpha) + cos(alpha + gamma)) / 2.
    #[inline]
    pub fn displacement_cos_exact(&self, alpha: f64) -> f64 {
        (alpha.cos() + (alpha + self.overlap_angle(alpha)).cos()) / 2.0
    }

    /// Reactive power drawn per watt of active power at DC voltage `u`
    /// (dimensionless; uncompensated).
    #[inline]
    pub fn q_factor(&self, u: f64) -> f64 {
        let phi = self.phase_linear(self.firing_angle(u));
        (self.c_qs * phi.sin()).hypot(self.c_qd) / u
    }

    /// Uncompensated reactive power at active power `p_w` and DC voltage
    /// `u`, var.
    #[inline]
    pub fn reactive_raw(&self, p_w: f64, u: f64) -> f64 {
        self.q_factor(u) * p_w
    }

    /// Power factor of a P/Q pair (1.0 at zero load).
    #[inline]
    pub fn power_factor(p_w: f64, q_var: f64) -> f64 {
        if p_w <= 0.0 {
            return 1.0;
        }
        p_w / p_w.hypot(q_var)
    }

    /// Fundamental AC current at active power `p_w` and displacement factor
    /// `cos_phi`, A.
    #[inline]
    pub fn fundamental_current(&self, p_w: f64, cos_phi: f64) -> f64 {
        p_w / (3.0f64.sqrt() * self.u_grid * cos_phi)
    }

    /// Harmonic (distortion) current for fundamental `i1`, A.
    #[inline]
    pub fn distortion_current(&self, i1: f64) -> f64 {
        self.c_dist * i1
    }
}

// ==================================================================
// tests
// ==================================================================

#[cfg(test)]
mod tests {
    use super::*;

    fn r() -> RectifierParams {
        RectifierParams::default()
    }

    #[test]
    fn firing_angle_spot_value() {
        // u = 200 V -> cos(alpha) = 0.814
        assert!((r().firing_angle(200.0) - 0.619791).abs() < 1e-5);
        // rated-envelope voltages keep the argument well inside [-1, 1]
        assert!(r().firing_angle(146.0) > r().firing_angle(220.0));
    }

    #[test]
    fn overlap_angle_spot_value() {
        assert!((r().overlap_angle(0.5) - 0.1696).abs() < 1e-4);
    }

    #[test]
    fn displacement_factor_at_zero_firing() {
        // alpha = 0: cos(phi) = (1 + cos(g0)) / 2
        let r = r();
        let c = r.displacement_cos_exact(0.0);
        assert!((c - 0.937224).abs() < 1e-5, "{c}");
    }

    #[test]
    fn linear_phase_tracks_exact_phase() {
        // the reactive chain uses sin(phi); the linearized phase must agree
        // with the conduction-interval average to within 1% over the
        // operating voltage window
        let r = r();
        let mut worst = 0.0f64;
        for k in 0..=200 {
            let u = 140.0 + (225.0 - 140.0) * k as f64 / 200.0;
            let a = r.firing_angle(u);
            let sin_lin = r.phase_linear(a).sin();
            let sin_exact = (1.0 - r.displacement_cos_exact(a).powi(2)).sqrt();
            worst = worst.max((sin_lin - sin_exact).abs() / sin_exact);
        }
        assert!(worst <= 0.01, "worst relative sine error {worst}");
    }

    #[test]
    fn calibration_constants_are_self_consistent() {
        let r = r();
        // no-load DC voltage from grid voltage and turns constant
        let u_di0 = 2.44 * r.u_grid / r.k_turns;
        assert!((r.c_qs - u_di0).abs() / u_di0 < 1e-3, "c_qs vs {u_di0}");
        assert!((r.c_alpha - 1.0 / u_di0).abs() * u_di0 < 1e-3, "c_alpha vs {}", 1.0 / u_di0);
        // distortion scale: c_qd/U per watt against sqrt(3) u_grid i_dist per
        // watt; the printed constant absorbs a mid-range displacement factor,
        // so agreement is loose at the envelope edges and tight mid-range
        let rel = |u: f64| {
            let phi = r.phase_linear(r.firing_angle(u));
            let derived = r.c_dist / phi.cos();
            let printed = r.c_qd / u;
            (printed - derived).abs() / derived
        };
        assert!(rel(200.0) < 0.04, "mid-range {}", rel(200.0));
        for k in 0..=20 {
            let u = 146.0 + (220.0 - 146.0) * k as f64 / 20.0;
            assert!(rel(u) < 0.10, "u={u}: {}", rel(u));
        }
    }

    #[test]
    fn distortion_current_fraction() {
        assert!((r().distortion_current(100.0) - 7.6324).abs() < 1e-3);
    }

    #[test]
    fn q_factor_falls_as_voltage_rises() {
        let r = r();
        let mut prev = r.q_factor(146.0);
        for k in 1..=30 {
            let u = 146.0 + (220.0 - 146.0) * k as f64 / 30.0;
            let f = r.q_factor(u);
            assert!(f < prev, "q_factor must decrease with voltage (u={u})");
            prev = f;
        }
    }

    #[test]
    fn power_factor_definition() {
        assert_eq!(RectifierParams::power_factor(0.0, 5.0), 1.0);
        let pf = RectifierParams::power_factor(1.0, 1.0);
        assert!((pf - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        // sign of reactive power does not matter for magnitude
        assert_eq!(
            RectifierParams::power_factor(2.0, 0.5),
            RectifierParams::power_factor(2.0, -0.5)
        );
    }
}
