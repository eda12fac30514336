//! Offline characterization: fits the low-order surrogates the scheduler and
//! dispatcher consume.
//!
//! Produces, in one pass over the operating envelope:
//! - a cubic power-factor map in normalized current and temperature for fast
//!   screening and dispatch-side guards,
//! - per-cell linear planes of stack power and power factor over a current
//!   segment x temperature band grid (the scheduler's piecewise model),
//! - chord tables for hydrogen production and the quadratic auxiliary loss on
//!   the same current segments (so segment variables share one breakpoint
//!   set),
//! - power-slope bounds used to convert power headroom into current headroom,
//! - a data-driven power-factor margin: the scheduler promises a bus power
//!   factor through approximations (planes, per-stack aggregation), and the
//!   margin covers the observed optimistic tail of that chain, clamped to a
//!   fixed band so the threshold stays predictable across refits.
//!
//! The result is a serializable artifact tied to the configuration that
//! produced it by content hash.

use std::io;
use std::path::Path;

use p2h_milp::{chord_segments, max_abs_error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::plant::{PlantParams, StackState};

// ==================================================================
// options
// ==================================================================

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Piecewise current segments (shared by planes and chord tables).
    pub current_segments: usize,
    /// Temperature bands.
    pub temp_bands: usize,
    /// Least-squares samples per axis per cell.
    pub cell_samples: usize,
    /// Random allocations drawn when estimating the power-factor margin.
    pub margin_scenarios: usize,
    /// Margin band: the estimated optimistic tail is clamped to
    /// [floor, cap] so one refit cannot silently move the effective
    /// power-factor threshold.
    pub margin_floor: f64,
    pub margin_cap: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            current_segments: 5,
            temp_bands: 2,
            cell_samples: 9,
            margin_scenarios: 4000,
            margin_floor: 0.010,
            margin_cap: 0.015,
            seed: 42,
        }
    }
}

impl FitOptions {
    pub fn from_config(cfg: &Config) -> Self {
        Self {
            current_segments: cfg.scheduler.current_segments,
            temp_bands: cfg.scheduler.temp_bands,
            seed: cfg.sim.seed,
            ..Self::default()
        }
    }
}

// ==================================================================
// artifact pieces
// ==================================================================

/// Linear map `f(i, t) ~= c_i*i + c_t*t + c_0` on one grid cell.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Plane {
    pub c_i: f64,
    pub c_t: f64,
    pub c_0: f64,
}

impl Plane {
    #[inline]
    pub fn eval(&self, i: f64, t: f64) -> f64 {
        self.c_i * i + self.c_t * t + self.c_0
    }
}

/// One linear piece `y = a*x + b` on `x in [lo, hi]` (serializable mirror of
/// the optimizer's segment type).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinSeg {
    pub lo: f64,
    pub hi: f64,
    pub a: f64,
    pub b: f64,
}

impl LinSeg {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
}

/// Fits attached to one (current segment, temperature band) cell.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CellFit {
    pub i_lo: f64,
    pub i_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Stack electric power, W.
    pub p: Plane,
    /// Stack-level power factor.
    pub pf: Plane,
    /// Worst in-cell absolute errors of the two planes.
    pub p_err: f64,
    pub pf_err: f64,
}

/// Cubic power-factor map `pf ~= c0 + c1*x + c2*x^2 + c3*x^3 + c4*y + c5*x*y`
/// with `x = i / i_scale` and `y = t / t_scale`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PfCubic {
    pub coefs: [f64; 6],
    pub i_scale: f64,
    pub t_scale: f64,
    /// Root-mean-square error over the fit grid.
    pub rmse: f64,
    /// Worst absolute error over a dense validation grid.
    pub max_err: f64,
}

impl PfCubic {
    #[inline]
    pub fn eval(&self, i: f64, t: f64) -> f64 {
        let x = i / self.i_scale;
        let y = t / self.t_scale;
        let c = &self.coefs;
        c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x + c[4] * y + c[5] * x * y
    }
}

// ==================================================================
// artifact
// ==================================================================

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitArtifact {
    /// Content hash (hex) of the configuration this fit belongs to.
    pub config_hash: String,
    /// Operating envelope the surrogates are valid on.
    pub i_min: f64,
    pub i_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Segment breakpoints, ascending, length `current_segments + 1`.
    pub current_edges: Vec<f64>,
    /// Band breakpoints, ascending, length `temp_bands + 1`.
    pub temp_edges: Vec<f64>,
    /// Cell fits, row-major: cell (k, l) at `k * temp_bands + l`.
    pub cells: Vec<CellFit>,
    pub pf_cubic: PfCubic,
    /// Hydrogen rate chords (kg/h vs A) on the current segments.
    pub m_segs: Vec<LinSeg>,
    /// Quadratic auxiliary-loss chords (W vs A) on the current segments.
    pub aux_segs: Vec<LinSeg>,
    pub m_max_err: f64,
    pub aux_max_err: f64,
    pub p_plane_max_err: f64,
    pub pf_plane_max_err: f64,
    /// Bounds of dP/dI over the envelope, W/A.
    pub dp_di_min: f64,
    pub dp_di_max: f64,
    /// Final clamped power-factor margin added to the configured floor.
    pub pf_margin: f64,
    /// 99th percentile of the optimistic surrogate error before clamping.
    pub margin_p99: f64,
    /// Worst optimistic surrogate error observed.
    pub margin_max: f64,
}

impl FitArtifact {
    /// Index of the cell containing `(i, t)` (clamped to the envelope).
    pub fn cell_index(&self, i: f64, t: f64) -> usize {
        let k = bucket(&self.current_edges, i);
        let l = bucket(&self.temp_edges, t);
        k * (self.temp_edges.len() - 1) + l
    }

    /// Plane-predicted stack power, W.
    pub fn plane_p(&self, i: f64, t: f64) -> f64 {
        self.cells[self.cell_index(i, t)].p.eval(i, t)
    }

    /// Plane-predicted stack power factor.
    pub fn plane_pf(&self, i: f64, t: f64) -> f64 {
        self.cells[self.cell_index(i, t)].pf.eval(i, t)
    }

    /// Piecewise-linear hydrogen rate, kg/h.
    pub fn m_pwl(&self, i: f64) -> f64 {
        let k = bucket(&self.current_edges, i);
        self.m_segs[k].eval(i)
    }

    /// Effective power-factor threshold the scheduler enforces.
    pub fn pf_eff(&self, pf_min: f64) -> f64 {
        pf_min + self.pf_margin
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        std::fs::write(path, text)
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

/// Index of the half-open bucket containing `x` (last bucket closed above).
fn bucket(edges: &[f64], x: f64) -> usize {
    let n = edges.len() - 1;
    for k in 0..n {
        if x < edges[k + 1] {
            return k;
        }
    }
    n - 1
}

// ==================================================================
// fitting
// ==================================================================

/// Characterize the plant and fit every surrogate the controllers need.
pub fn fit_plant(plant: &PlantParams, opts: &FitOptions, config_hash: u64) -> FitArtifact {
    let sp = &plant.stack;
    let (i_min, i_max) = (sp.i_min_on, sp.i_max);
    let (t_min, t_max) = (sp.t_amb, sp.t_max);

    let current_edges = linspace(i_min, i_max, opts.current_segments + 1);
    let temp_edges = linspace(t_min, t_max, opts.temp_bands + 1);

    // true per-stack responses on the energized envelope. The fitted power
    // factor credits each stack with its share of BOTH compensation layers
    // (rectifier bank plus bus-bank share), so that the per-stack average
    // over energized stacks equals the bus power factor exactly whenever the
    // split is homogeneous — the scheduler's plant row averages these.
    let p_true = |i: f64, t: f64| sp.power(i, t);
    let pf_true = share_credited_pf(plant);

    // per-cell planes
    let mut cells = Vec::with_capacity(opts.current_segments * opts.temp_bands);
    let mut p_plane_max_err = 0.0f64;
    let mut pf_plane_max_err = 0.0f64;
    for k in 0..opts.current_segments {
        for l in 0..opts.temp_bands {
            let (i_lo, i_hi) = (current_edges[k], current_edges[k + 1]);
            let (t_lo, t_hi) = (temp_edges[l], temp_edges[l + 1]);
            let (p, p_err) = fit_plane(&p_true, i_lo, i_hi, t_lo, t_hi, opts.cell_samples);
            let (pf, pf_err) = fit_plane(&pf_true, i_lo, i_hi, t_lo, t_hi, opts.cell_samples);
            p_plane_max_err = p_plane_max_err.max(p_err);
            pf_plane_max_err = pf_plane_max_err.max(pf_err);
            cells.push(CellFit { i_lo, i_hi, t_lo, t_hi, p, pf, p_err, pf_err });
        }
    }

    // chord tables on the same segment grid: exact at the breakpoints, so a
    // segment variable sitting at an edge sees no model jump
    let m_fn = |i: f64| sp.hydrogen_rate(i);
    let aux_fn = |i: f64| sp.aux_a * i * i + sp.aux_b * i;
    let m_chords = chord_segments(m_fn, i_min, i_max, opts.current_segments);
    let aux_chords = chord_segments(aux_fn, i_min, i_max, opts.current_segments);
    let m_max_err = max_abs_error(m_fn, &m_chords, 4001);
    let aux_max_err = max_abs_error(aux_fn, &aux_chords, 4001);
    let to_lin = |s: &p2h_milp::Segment| LinSeg { lo: s.lo, hi: s.hi, a: s.a, b: s.b };
    let m_segs: Vec<LinSeg> = m_chords.iter().map(to_lin).collect();
    let aux_segs: Vec<LinSeg> = aux_chords.iter().map(to_lin).collect();

    // power-slope bounds (central differences over a fine grid)
    let (mut dp_di_min, mut dp_di_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let h = 1.0;
    for ti in 0..=22 {
        let t = t_min + (t_max - t_min) * ti as f64 / 22.0;
        for ii in 0..=80 {
            let i = i_min + (i_max - i_min) * ii as f64 / 80.0;
            let slope = (p_true(i + h, t) - p_true(i - h, t)) / (2.0 * h);
            dp_di_min = dp_di_min.min(slope);
            dp_di_max = dp_di_max.max(slope);
        }
    }

    // cubic power-factor map
    let pf_cubic = fit_pf_cubic(&pf_true, i_min, i_max, t_min, t_max);

    let mut art = FitArtifact {
        config_hash: format!("{config_hash:016x}"),
        i_min,
        i_max,
        t_min,
        t_max,
        current_edges,
        temp_edges,
        cells,
        pf_cubic,
        m_segs,
        aux_segs,
        m_max_err,
        aux_max_err,
        p_plane_max_err,
        pf_plane_max_err,
        dp_di_min,
        dp_di_max,
        pf_margin: 0.0,
        margin_p99: 0.0,
        margin_max: 0.0,
    };

    let (p99, worst) = estimate_margin(plant, &art, opts);
    art.margin_p99 = p99;
    art.margin_max = worst;
    art.pf_margin = p99.max(opts.margin_floor).min(opts.margin_cap);
    art
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Per-stack power factor credited with the stack's share of both
/// compensation layers (the quantity the scheduler's plant row averages).
pub fn share_credited_pf(plant: &PlantParams) -> impl Fn(f64, f64) -> f64 + '_ {
    let qc_share = plant.qc_stack + plant.qc_bus_per_stack;
    move |i: f64, t: f64| {
        let u = plant.stack.voltage(i, t);
        let p = plant.stack.power(i, t);
        let q = plant.rect.reactive_raw(p, u) - qc_share;
        crate::rectifier::RectifierParams::power_factor(p, q)
    }
}

/// Least-squares plane over one cell. Coordinates are centered and scaled to
/// [-1, 1] before solving the 3x3 normal equations, then mapped back. The
/// returned error is the worst deviation on a denser in-cell grid.
fn fit_plane(
    f: &impl Fn(f64, f64) -> f64,
    i_lo: f64,
    i_hi: f64,
    t_lo: f64,
    t_hi: f64,
    n: usize,
) -> (Plane, f64) {
    let ic = 0.5 * (i_lo + i_hi);
    let tc = 0.5 * (t_lo + t_hi);
    let iw = 0.5 * (i_hi - i_lo);
    let tw = 0.5 * (t_hi - t_lo);
    let mut ata = [0.0f64; 9];
    let mut atb = [0.0f64; 3];
    for a in 0..n {
        for b in 0..n {
            let x = -1.0 + 2.0 * a as f64 / (n - 1) as f64;
            let y = -1.0 + 2.0 * b as f64 / (n - 1) as f64;
            let v = f(ic + x * iw, tc + y * tw);
            let basis = [1.0, x, y];
            for r in 0..3 {
                for c in 0..3 {
                    ata[r * 3 + c] += basis[r] * basis[c];
                }
                atb[r] += basis[r] * v;
            }
        }
    }
    assert!(solve_dense(3, &mut ata, &mut atb), "plane normal equations are singular");
    let plane = Plane {
        c_i: atb[1] / iw,
        c_t: atb[2] / tw,
        c_0: atb[0] - atb[1] * ic / iw - atb[2] * tc / tw,
    };
    let mut err = 0.0f64;
    for a in 0..=20 {
        for b in 0..=20 {
            let i = i_lo + (i_hi - i_lo) * a as f64 / 20.0;
            let t = t_lo + (t_hi - t_lo) * b as f64 / 20.0;
            err = err.max((f(i, t) - plane.eval(i, t)).abs());
        }
    }
    (plane, err)
}

fn fit_pf_cubic(
    pf_true: &impl Fn(f64, f64) -> f64,
    i_min: f64,
    i_max: f64,
    t_min: f64,
    t_max: f64,
) -> PfCubic {
    let (i_scale, t_scale) = (i_max, t_max);
    let (ni, nt) = (41, 23);
    let mut ata = [0.0f64; 36];
    let mut atb = [0.0f64; 6];
    let mut sq = 0.0f64;
    let mut count = 0usize;
    let mut rows: Vec<([f64; 6], f64)> = Vec::with_capacity(ni * nt);
    for a in 0..ni {
        for b in 0..nt {
            let i = i_min + (i_max - i_min) * a as f64 / (ni - 1) as f64;
            let t = t_min + (t_max - t_min) * b as f64 / (nt - 1) as f64;
            let x = i / i_scale;
            let y = t / t_scale;
            let basis = [1.0, x, x * x, x * x * x, y, x * y];
            let v = pf_true(i, t);
            for r in 0..6 {
                for c in 0..6 {
                    ata[r * 6 + c] += basis[r] * basis[c];
                }
                atb[r] += basis[r] * v;
            }
            rows.push((basis, v));
        }
    }
    assert!(solve_dense(6, &mut ata, &mut atb), "cubic normal equations are singular");
    let coefs = atb;
    for (basis, v) in &rows {
        let pred: f64 = (0..6).map(|r| coefs[r] * basis[r]).sum();
        sq += (pred - v) * (pred - v);
        count += 1;
    }
    let rmse = (sq / count as f64).sqrt();
    let cubic = PfCubic { coefs, i_scale, t_scale, rmse, max_err: 0.0 };
    let mut max_err = 0.0f64;
    for a in 0..=200 {
        for b in 0..=110 {
            let i = i_min + (i_max - i_min) * a as f64 / 200.0;
            let t = t_min + (t_max - t_min) * b as f64 / 110.0;
            max_err = max_err.max((cubic.eval(i, t) - pf_true(i, t)).abs());
        }
    }
    PfCubic { max_err, ..cubic }
}

/// Gauss-Jordan with partial pivoting on a dense row-major `n x n` system;
/// the solution lands in `b`. Returns false on a (near-)singular matrix.
fn solve_dense(n: usize, a: &mut [f64], b: &mut [f64]) -> bool {
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-12 {
            return false;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    for i in 0..n {
        b[i] /= a[i * n + i];
    }
    true
}

/// Measure how optimistic the scheduler's power-factor chain can get: draw
/// structured allocations (equal and two-level splits, per-stack temperature
/// jitter), predict the plant row's per-stack average from the fitted planes
/// and compare against the true bus power factor. Returns the 99th percentile
/// and maximum of the optimistic (positive) error.
fn estimate_margin(plant: &PlantParams, art: &FitArtifact, opts: &FitOptions) -> (f64, f64) {
    let sp = &plant.stack;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut errs = Vec::with_capacity(opts.margin_scenarios);
    for _ in 0..opts.margin_scenarios {
        let n_on = rng.gen_range(1..=plant.n_stacks.max(1));
        let t_base = rng.gen_range(sp.t_amb..=sp.t_max);
        let i_mean = rng.gen_range(sp.i_min_on..=sp.i_max);
        let spread =
            if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..=0.6 * sp.i_max) };
        let mut states = Vec::with_capacity(n_on);
        let mut predicted = 0.0;
        for b in 0..n_on {
            let side = if b % 2 == 0 { 0.5 } else { -0.5 };
            let i = (i_mean + side * spread).clamp(sp.i_min_on, sp.i_max);
            let t = (t_base + rng.gen_range(-5.0..=5.0)).clamp(sp.t_amb, sp.t_max);
            predicted += art.plane_pf(i, t);
            states.push(StackState { committed: true, i, t_c: t, hto: 0.0 });
        }
        let truth = plant.bus_output(&states).pf;
        errs.push(predicted / n_on as f64 - truth);
    }
    errs.sort_by(f64::total_cmp);
    let p99 = errs[((errs.len() as f64 * 0.99) as usize).min(errs.len() - 1)].max(0.0);
    let worst = errs.last().copied().unwrap_or(0.0).max(0.0);
    (p99, worst)
}

// ==================================================================
// tests
// ==================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::PlantParams;

    fn artifact() -> FitArtifact {
        fit_plant(&PlantParams::default(), &FitOptions::default(), 0xabcd)
    }

    #[test]
    fn cubic_map_tracks_the_power_factor_surface() {
        let art = artifact();
        let c = &art.pf_cubic;
        assert!(c.rmse < 2.0e-3, "rmse {}", c.rmse);
        assert!(c.max_err < 1.0e-2, "max err {}", c.max_err);
        // coefficient pattern: positive intercept, current terms alternating
        // sign (valley shape), both temperature terms slightly negative
        let expect = [1.144275, -0.915404, 1.146009, -0.433193, -0.015972, -0.010744];
        for (got, want) in c.coefs.iter().zip(expect) {
            assert!((got - want).abs() < 0.02, "coefs {:?}", c.coefs);
        }
        // the map reproduces the hot-trace valley of the share-credited
        // power factor: interior argmin near 3110 A, depth about 0.892
        let mut min_i = 0.0;
        let mut min_pf = 2.0;
        for k in 0..=400 {
            let i = 1000.0 + 4000.0 * k as f64 / 400.0;
            let v = c.eval(i, 80.0);
            if v < min_pf {
                min_pf = v;
                min_i = i;
            }
        }
        assert!(min_i > 2500.0 && min_i < 3800.0, "argmin {min_i}");
        assert!((min_pf - 0.8917).abs() < 0.01, "valley depth {min_pf}");
    }

    #[test]
    fn planes_stay_inside_the_two_percent_budget() {
        let art = artifact();
        assert_eq!(art.cells.len(), 5 * 2);
        // power planes: 2% of the rated 1.21 MW point
        assert!(art.p_plane_max_err < 0.02 * 1.21e6, "p err {}", art.p_plane_max_err);
        assert!(art.p_plane_max_err < 8.0e3, "p err should be a few kW, got {}", art.p_plane_max_err);
        assert!(art.pf_plane_max_err < 0.008, "pf err {}", art.pf_plane_max_err);
        // every cell records its own error not exceeding the global worst
        for c in &art.cells {
            assert!(c.p_err <= art.p_plane_max_err + 1e-12);
            assert!(c.pf_err <= art.pf_plane_max_err + 1e-12);
        }
    }

    #[test]
    fn chord_tables_are_tight_and_exact_at_breakpoints() {
        let art = artifact();
        let sp = PlantParams::default().stack;
        // production chords: well under 2% of the rated 17.73 kg/h
        assert!(art.m_max_err < 0.02 * 17.73, "m err {}", art.m_max_err);
        assert!(art.m_max_err < 0.06, "m err should be ~0.03 kg/h, got {}", art.m_max_err);
        // auxiliary quadratic chords: worst midpoint sag a*(w/2)^2 = 86.4 W
        assert!(art.aux_max_err < 100.0, "aux err {}", art.aux_max_err);
        for edge in &art.current_edges {
            assert!((art.m_pwl(*edge) - sp.hydrogen_rate(*edge)).abs() < 1e-9);
        }
        // segment boundaries line up across all three tables
        for (k, seg) in art.m_segs.iter().enumerate() {
            assert_eq!(seg.lo, art.current_edges[k]);
            assert_eq!(seg.hi, art.current_edges[k + 1]);
            assert_eq!(art.aux_segs[k].lo, seg.lo);
        }
    }

    #[test]
    fn power_slope_bounds_bracket_the_envelope() {
        let art = artifact();
        // shallowest slope at low current hot, steepest at rated current cold
        assert!(art.dp_di_min > 140.0 && art.dp_di_min < 200.0, "min {}", art.dp_di_min);
        assert!(art.dp_di_max > 280.0 && art.dp_di_max < 340.0, "max {}", art.dp_di_max);
        let sp = PlantParams::default().stack;
        let slope_low_hot = (sp.power(1001.0, 80.0) - sp.power(999.0, 80.0)) / 2.0;
        assert!(art.dp_di_min <= slope_low_hot + 1e-6);
    }

    #[test]
    fn margin_lands_in_the_clamp_band() {
        let art = artifact();
        assert!(
            art.pf_margin >= 0.010 - 1e-12 && art.pf_margin <= 0.015 + 1e-12,
            "margin {}",
            art.pf_margin
        );
        assert!(art.margin_max >= art.margin_p99);
        // the effective threshold the scheduler enforces
        let eff = art.pf_eff(0.9);
        assert!(eff >= 0.910 - 1e-12 && eff <= 0.915 + 1e-12, "threshold {eff}");
    }

    #[test]
    fn plane_lookup_agrees_with_truth_within_recorded_error() {
        let art = artifact();
        let plant = PlantParams::default();
        let sp = &plant.stack;
        let pf_true = share_credited_pf(&plant);
        for (i, t) in [(1000.0, 25.0), (2566.0, 80.0), (3140.0, 75.0), (5000.0, 80.0), (4390.0, 62.0)]
        {
            let cell = &art.cells[art.cell_index(i, t)];
            assert!(i >= cell.i_lo && i <= cell.i_hi);
            assert!(t >= cell.t_lo && t <= cell.t_hi);
            let p_err = (art.plane_p(i, t) - sp.power(i, t)).abs();
            assert!(p_err <= art.p_plane_max_err + 1e-9, "P at ({i},{t}): {p_err}");
            let pf_err = (art.plane_pf(i, t) - pf_true(i, t)).abs();
            assert!(pf_err <= art.pf_plane_max_err + 1e-9, "pf at ({i},{t}): {pf_err}");
        }
        // the share-credited column average reproduces a bus anchor exactly
        // for a homogeneous split
        assert!((pf_true(3140.0, 75.0) - plant.bus_pf_at(&[3140.0, 3140.0], 75.0)).abs() < 1e-12);
        // envelope corners fall into the first and last cells
        assert_eq!(art.cell_index(1000.0, 25.0), 0);
        assert_eq!(art.cell_index(5000.0, 80.0), art.cells.len() - 1);
    }

    #[test]
    fn artifact_round_trips_through_toml() {
        let art = artifact();
        let text = toml::to_string_pretty(&art).unwrap();
        let back: FitArtifact = toml::from_str(&text).unwrap();
        assert_eq!(back.config_hash, art.config_hash);
        assert_eq!(back.cells.len(), art.cells.len());
        assert_eq!(back.pf_cubic.coefs, art.pf_cubic.coefs);
        assert_eq!(back.pf_margin, art.pf_margin);
        assert_eq!(back.m_segs.len(), art.m_segs.len());
        assert_eq!(back.m_segs[2].a, art.m_segs[2].a);
    }
}
