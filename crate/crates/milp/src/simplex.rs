//! Bounded-variable simplex engine.
//!
//! One engine serves three entry points:
//!
//! * `solve_fresh` — cold start. If every variable with a nonzero objective
//!   coefficient has the bound needed for a dual-feasible slack basis, the
//!   engine starts there and runs the dual simplex (which handles primal
//!   infeasibility natively). Otherwise it falls back to a composite phase-1
//!   primal (no artificial variables) followed by phase-2.
//! * `reoptimize_dual` — re-solve after bound changes only (branching, warm
//!   starts): bound changes never disturb dual feasibility, so the dual
//!   simplex restores optimality in a handful of pivots.
//! * `primal_optimize` — phase-2 primal from a primal-feasible basis.
//!
//! The basis inverse is kept dense (row-major) and updated by elementary row
//! operations per pivot; it is refactorized from scratch every few hundred
//! pivots — immediately after an unavoidably small pivot element — and any
//! terminal claim (optimal, infeasible, unbounded) made while the update
//! chain contained a suspect pivot is first re-verified on a fresh inverse.
//! Ratio tests prefer large pivot elements among near-tied candidates.
//! Degeneracy is handled by switching to Bland's rule after a run of
//! non-improving steps.

use crate::model::{Model, RowSense};

// ==================================================================
// parameters and outcomes
// ==================================================================

#[derive(Debug, Clone)]
pub struct SimplexParams {
    /// Primal feasibility tolerance on bounds and rows.
    pub feas_tol: f64,
    /// Dual feasibility / optimality tolerance on reduced costs.
    pub opt_tol: f64,
    /// Smallest pivot magnitude accepted in the ratio tests.
    pub piv_tol: f64,
    /// Hard iteration cap per optimize call (0 = automatic).
    pub max_iters: usize,
    /// Refactorize the basis inverse every this many pivots.
    pub refactor_every: usize,
}

impl Default for SimplexParams {
    fn default() -> Self {
        Self { feas_tol: 1e-7, opt_tol: 1e-9, piv_tol: 1e-9, max_iters: 0, refactor_every: 300 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

/// Result of one LP solve against the engine's current bounds.
#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub objective: f64,
    /// Values of the structural variables.
    pub x: Vec<f64>,
    /// Row duals (maximization convention: binding `<=` rows price >= 0).
    pub duals: Vec<f64>,
    /// Reduced costs of the structural variables.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

// ==================================================================
// variable state
// ==================================================================

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum VState {
    AtLo,
    AtHi,
    /// Nonbasic free variable pinned at zero.
    Free,
    Basic(u32),
}

const INF: f64 = f64::INFINITY;

/// Pivot magnitudes the ratio tests prefer to stay above: product-form
/// updates scale rows by `1/|pivot|`, so anything smaller amplifies
/// rounding error in the inverse by ~1e7 per pivot.
const PIV_STAB: f64 = 1e-7;
/// Accepted pivots below this trigger an immediate refactorization.
const PIV_REBUILD: f64 = 1e-6;
/// Accepted pivots below this mark the inverse dirty, forcing terminal
/// claims (optimal / infeasible / unbounded) to be re-verified on a
/// freshly rebuilt inverse.
const PIV_DIRTY: f64 = 1e-4;

// ==================================================================
// engine
// ==================================================================

pub struct Simplex {
    pub(crate) n: usize,
    pub(crate) m: usize,
    /// n structural + m slack variables.
    total: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    obj: Vec<f64>,
    /// Sparse columns of the structural variables.
    cols: Vec<Vec<(u32, f64)>>,
    rhs: Vec<f64>,
    state: Vec<VState>,
    basis: Vec<u32>,
    /// Dense basis inverse, row-major m*m.
    binv: Vec<f64>,
    /// Values of the basic variables, by row.
    xb: Vec<f64>,
    params: SimplexParams,
    pivots_since_refactor: usize,
    /// A pivot element small enough to seed noticeable error entered the
    /// product-form updates since the last rebuild; terminal claims are
    /// re-verified on a fresh inverse while this is set.
    dirty_since_refactor: bool,
    solved_once: bool,
    /// Cost tie-breaker currently folded into `obj` (see `apply_jitter`).
    jitter: Vec<f64>,
    jitter_on: bool,
    // scratch buffers
    wcol: Vec<f64>,
    yrow: Vec<f64>,
}

impl Simplex {
    /// Build an engine from a model (integrality marks are ignored here).
    pub fn new(model: &Model, params: SimplexParams) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let total = n + m;
        let mut lo = Vec::with_capacity(total);
        let mut hi = Vec::with_capacity(total);
        let mut obj = vec![0.0; total];
        for (i, (_, v)) in model.vars().enumerate() {
            lo.push(v.lo);
            hi.push(v.hi);
            obj[i] = v.obj;
        }
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut rhs = Vec::with_capacity(m);
        for (ri, (_, row)) in model.rows().enumerate() {
            for &(v, c) in &row.coefs {
                cols[v.index()].push((ri as u32, c));
            }
            rhs.push(row.rhs);
            // slack bounds chosen so that  a.x + s = rhs  encodes the sense
            match row.sense {
                RowSense::Le => {
                    lo.push(0.0);
                    hi.push(INF);
                }
                RowSense::Ge => {
                    lo.push(-INF);
                    hi.push(0.0);
                }
                RowSense::Eq => {
                    lo.push(0.0);
                    hi.push(0.0);
                }
            }
        }
        Self {
            n,
            m,
            total,
            lo,
            hi,
            obj,
            cols,
            rhs,
            state: vec![VState::AtLo; total],
            basis: vec![0; m],
            binv: vec![0.0; m * m],
            xb: vec![0.0; m],
            params,
            pivots_since_refactor: 0,
            dirty_since_refactor: false,
            solved_once: false,
            jitter: vec![0.0; total],
            jitter_on: false,
            wcol: vec![0.0; m],
            yrow: vec![0.0; m],
        }
    }

    #[inline]
    fn iter_cap(&self) -> usize {
        if self.params.max_iters > 0 {
            self.params.max_iters
        } else {
            50 * (self.m + self.n) + 10_000
        }
    }

    // --------------------------------------------------------------
    // bounds interface (used by branch & bound)
    // --------------------------------------------------------------

    pub fn var_bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    /// Change the bounds of structural variable `j`. Keeps the basis; the
    /// nonbasic state is re-pinned to the nearest finite bound if its current
    /// anchor vanished or moved.
    pub fn set_var_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        debug_assert!(j < self.n);
        self.lo[j] = lo;
        self.hi[j] = hi;
        match self.state[j] {
            VState::AtLo if !lo.is_finite() => {
                self.state[j] = if hi.is_finite() { VState::AtHi } else { VState::Free };
            }
            VState::AtHi if !hi.is_finite() => {
                self.state[j] = if lo.is_finite() { VState::AtLo } else { VState::Free };
            }
            _ => {}
        }
    }

    // --------------------------------------------------------------
    // linear algebra helpers
    // --------------------------------------------------------------

    #[inline]
    fn nb_val(&self, j: usize) -> f64 {
        match self.state[j] {
            VState::AtLo => self.lo[j],
            VState::AtHi => self.hi[j],
            VState::Free => 0.0,
            VState::Basic(r) => self.xb[r as usize],
        }
    }

    /// wcol = Binv * (column j), accumulating only the column's nonzeros.
    fn ftran(&mut self, j: usize) {
        if j >= self.n {
            // slack column is a unit vector: Binv column (j - n)
            let r = j - self.n;
            for i in 0..self.m {
                self.wcol[i] = self.binv[i * self.m + r];
            }
            return;
        }
        self.wcol.fill(0.0);
        for &(r, c) in &self.cols[j] {
            let r = r as usize;
            for i in 0..self.m {
                self.wcol[i] += c * self.binv[i * self.m + r];
            }
        }
    }

    /// yrow = c_B^T * Binv for the true objective.
    fn btran_obj(&mut self) {
        self.yrow.fill(0.0);
        for i in 0..self.m {
            let c = self.obj[self.basis[i] as usize];
            if c != 0.0 {
                let row = &self.binv[i * self.m..(i + 1) * self.m];
                for k in 0..self.m {
                    self.yrow[k] += c * row[k];
                }
            }
        }
    }

    /// Reduced cost of variable j against the current `yrow`.
    #[inline]
    fn reduced_cost(&self, j: usize, use_obj: bool) -> f64 {
        let c = if use_obj { self.obj[j] } else { 0.0 };
        if j < self.n {
            let mut acc = 0.0;
            for &(r, a) in &self.cols[j] {
                acc += self.yrow[r as usize] * a;
            }
            c - acc
        } else {
            c - self.yrow[j - self.n]
        }
    }

    /// Recompute all basic values from scratch: xb = Binv (rhs - N x_N).
    fn recompute_xb(&mut self) {
        // effective rhs after fixing nonbasic variables at their anchors
        let mut eff = self.rhs.clone();
        for j in 0..self.total {
            if matches!(self.state[j], VState::Basic(_)) {
                continue;
            }
            let v = self.nb_val(j);
            if v == 0.0 {
                continue;
            }
            if j < self.n {
                for &(r, c) in &self.cols[j] {
                    eff[r as usize] -= c * v;
                }
            } else {
                eff[j - self.n] -= v;
            }
        }
        for i in 0..self.m {
            let row = &self.binv[i * self.m..(i + 1) * self.m];
            let mut acc = 0.0;
            for k in 0..self.m {
                acc += row[k] * eff[k];
            }
            self.xb[i] = acc;
        }
    }

    /// Rebuild `binv` by inverting the basis matrix (Gauss-Jordan with
    /// partial pivoting). Returns false when the basis is numerically
    /// singular.
    fn refactorize(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![0.0; m * m]; // basis matrix, row-major
        for (col, &bj) in self.basis.iter().enumerate() {
            let bj = bj as usize;
            if bj < self.n {
                for &(r, c) in &self.cols[bj] {
                    a[r as usize * m + col] = c;
                }
            } else {
                a[(bj - self.n) * m + col] = 1.0;
            }
        }
        // inv starts as identity
        self.binv.fill(0.0);
        for i in 0..m {
            self.binv[i * m + i] = 1.0;
        }
        for col in 0..m {
            // partial pivot
            let mut piv_row = col;
            let mut piv_val = a[col * m + col].abs();
            for r in col + 1..m {
                let v = a[r * m + col].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = r;
                }
            }
            if piv_val < 1e-12 {
                return false;
            }
            if piv_row != col {
                for k in 0..m {
                    a.swap(col * m + k, piv_row * m + k);
                    self.binv.swap(col * m + k, piv_row * m + k);
                }
            }
            let inv_p = 1.0 / a[col * m + col];
            for k in 0..m {
                a[col * m + k] *= inv_p;
                self.binv[col * m + k] *= inv_p;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[col * m + k];
                    self.binv[r * m + k] -= f * self.binv[col * m + k];
                }
            }
        }
        self.pivots_since_refactor = 0;
        self.dirty_since_refactor = false;
        true
    }

    /// Apply the pivot that makes variable `q` basic in row `r`, with `wcol`
    /// already holding Binv * a_q. `t` is the step of the entering variable
    /// along `dir`, and `exit_state` is where the leaving variable lands.
    fn pivot(&mut self, q: usize, r: usize, dir: f64, t: f64, exit_state: VState) {
        let m = self.m;
        let leaving = self.basis[r] as usize;
        // update basic values for the step
        for i in 0..m {
            if i != r {
                self.xb[i] -= dir * t * self.wcol[i];
            }
        }
        let enter_val = self.nb_val(q) + dir * t;
        // elementary row transformation of binv
        let piv = self.wcol[r];
        let inv_p = 1.0 / piv;
        {
            let row_r = &mut self.binv[r * m..(r + 1) * m];
            for k in 0..m {
                row_r[k] *= inv_p;
            }
        }
        for i in 0..m {
            if i == r {
                continue;
            }
            let f = self.wcol[i];
            if f == 0.0 {
                continue;
            }
            // binv[i,:] -= f * binv[r,:]
            let (head, tail) = self.binv.split_at_mut(r.max(i) * m);
            let (row_i, row_r) = if i < r {
                (&mut head[i * m..(i + 1) * m], &tail[..m])
            } else {
                (&mut tail[..m], &head[r * m..(r + 1) * m])
            };
            for k in 0..m {
                row_i[k] -= f * row_r[k];
            }
        }
        self.state[leaving] = exit_state;
        self.state[q] = VState::Basic(r as u32);
        self.basis[r] = q as u32;
        self.xb[r] = enter_val;
        self.pivots_since_refactor += 1;
        let pa = piv.abs();
        if pa < PIV_DIRTY {
            self.dirty_since_refactor = true;
        }
        if pa < PIV_REBUILD || self.pivots_since_refactor >= self.params.refactor_every {
            if self.refactorize() {
                self.recompute_xb();
            }
        }
    }

    // --------------------------------------------------------------
    // primal simplex
    // --------------------------------------------------------------

    /// One primal phase: `use_obj = false` runs the composite phase-1
    /// (maximize -total infeasibility), `true` runs phase-2 on the real
    /// objective. Returns the status of the phase.
    fn primal_phase(&mut self, use_obj: bool, iters: &mut usize) -> LpStatus {
        let ftol = self.params.feas_tol;
        let cap = self.iter_cap();
        let mut bland_mode = 0usize;
        let mut stall = 0usize;
        if use_obj {
            // phase 2 maintains duals incrementally across pivots; phase 1
            // rebuilds its composite duals from scratch every iteration
            self.btran_obj();
        }
        loop {
            *iters += 1;
            if *iters > cap {
                return LpStatus::IterLimit;
            }
            // (re)compute the phase objective on basic variables
            let mut infeas = 0.0;
            if !use_obj {
                let lo = &self.lo;
                let hi = &self.hi;
                let xb = &self.xb;
                self.yrow.fill(0.0);
                for i in 0..self.m {
                    let b = self.basis[i] as usize;
                    let c1 = if xb[i] < lo[b] - ftol {
                        infeas += lo[b] - xb[i];
                        1.0
                    } else if xb[i] > hi[b] + ftol {
                        infeas += xb[i] - hi[b];
                        -1.0
                    } else {
                        0.0
                    };
                    if c1 != 0.0 {
                        let row_i = &self.binv[i * self.m..(i + 1) * self.m];
                        for k in 0..self.m {
                            self.yrow[k] += c1 * row_i[k];
                        }
                    }
                }
                if infeas <= ftol * (1.0 + self.m as f64) {
                    if self.dirty_since_refactor && self.refactorize() {
                        self.recompute_xb();
                        continue; // re-verify feasibility on a fresh inverse
                    }
                    return LpStatus::Optimal; // feasible: phase 1 done
                }
            }
            // pricing
            let otol = self.params.opt_tol;
            let mut best: Option<(usize, f64, f64)> = None; // (var, |d|, dir)
            for j in 0..self.total {
                let dir = match self.state[j] {
                    VState::Basic(_) => continue,
                    VState::AtLo => 1.0,
                    VState::AtHi => -1.0,
                    VState::Free => 0.0,
                };
                if self.hi[j] - self.lo[j] <= 0.0 {
                    continue; // fixed variables can never move
                }
                let d = self.reduced_cost(j, use_obj);
                let (dir, score) = if self.state[j] == VState::Free {
                    if d.abs() <= otol {
                        continue;
                    }
                    (d.signum(), d.abs())
                } else if dir > 0.0 {
                    if d <= otol {
                        continue;
                    }
                    (1.0, d)
                } else {
                    if d >= -otol {
                        continue;
                    }
                    (-1.0, -d)
                };
                if bland_mode > 0 {
                    best = Some((j, score, dir));
                    break; // Bland: first eligible index
                }
                if best.map_or(true, |(_, s, _)| score > s) {
                    best = Some((j, score, dir));
                }
            }
            let (q, score_q, dir) = match best {
                Some(b) => b,
                None => {
                    if self.dirty_since_refactor && self.refactorize() {
                        self.recompute_xb();
                        if use_obj {
                            self.btran_obj();
                        }
                        continue; // re-price on a fresh inverse before claiming
                    }
                    return if use_obj { LpStatus::Optimal } else { LpStatus::Infeasible };
                }
            };
            // ratio test
            self.ftran(q);
            let ptol = self.params.piv_tol;
            let own_span = self.hi[q] - self.lo[q];
            let mut theta = if own_span.is_finite() { own_span } else { INF };
            let mut leave: Option<(usize, VState)> = None; // None => bound flip
            for i in 0..self.m {
                let w = self.wcol[i];
                if w.abs() <= ptol {
                    continue;
                }
                let b = self.basis[i] as usize;
                let (blk, exit_state) = if dir * w > 0.0 {
                    // basic value decreases
                    if self.xb[i] > self.hi[b] + ftol {
                        (self.hi[b], VState::AtHi) // violated above: catches at hi
                    } else {
                        (self.lo[b], VState::AtLo)
                    }
                } else {
                    // basic value increases
                    if self.xb[i] < self.lo[b] - ftol {
                        (self.lo[b], VState::AtLo) // violated below: catches at lo
                    } else {
                        (self.hi[b], VState::AtHi)
                    }
                };
                if !blk.is_finite() {
                    continue;
                }
                let t = (self.xb[i] - blk) / (dir * w);
                if t < theta - ptol
                    || (bland_mode > 0
                        && (t - theta).abs() <= ptol
                        && leave.map_or(false, |(li, _)| b < self.basis[li] as usize))
                {
                    theta = t.max(0.0);
                    leave = Some((i, exit_state));
                }
            }
            if theta.is_infinite() {
                if self.dirty_since_refactor && self.refactorize() {
                    self.recompute_xb();
                    if use_obj {
                        self.btran_obj();
                    }
                    continue; // re-verify on a fresh inverse before claiming
                }
                return if use_obj { LpStatus::Unbounded } else { LpStatus::Infeasible };
            }
            // among rows whose ratio ties the minimum, take the largest pivot
            // element: degenerate ties otherwise hand back near-singular
            // pivots that poison the inverse (skipped under Bland's rule,
            // which needs its own deterministic choice)
            if bland_mode == 0 {
                if let Some((r0, _)) = leave {
                    let mut best_w = self.wcol[r0].abs();
                    for i in 0..self.m {
                        let w = self.wcol[i];
                        if w.abs() <= best_w.max(ptol) || i == r0 {
                            continue;
                        }
                        let b = self.basis[i] as usize;
                        let (blk, exit_state) = if dir * w > 0.0 {
                            if self.xb[i] > self.hi[b] + ftol {
                                (self.hi[b], VState::AtHi)
                            } else {
                                (self.lo[b], VState::AtLo)
                            }
                        } else {
                            if self.xb[i] < self.lo[b] - ftol {
                                (self.lo[b], VState::AtLo)
                            } else {
                                (self.hi[b], VState::AtHi)
                            }
                        };
                        if !blk.is_finite() {
                            continue;
                        }
                        let t = (self.xb[i] - blk) / (dir * w);
                        if t >= -ftol && t <= theta + ptol {
                            best_w = w.abs();
                            leave = Some((i, exit_state));
                        }
                    }
                }
            }
            // degenerate-stall bookkeeping
            if theta <= ptol {
                stall += 1;
                if stall > 40 && bland_mode == 0 {
                    bland_mode = 400;
                }
            } else {
                stall = 0;
            }
            if bland_mode > 0 {
                bland_mode -= 1;
            }
            match leave {
                None => {
                    // bound flip of the entering variable (basis unchanged,
                    // so the maintained duals stay valid)
                    for i in 0..self.m {
                        self.xb[i] -= dir * theta * self.wcol[i];
                    }
                    self.state[q] = if dir > 0.0 { VState::AtHi } else { VState::AtLo };
                }
                Some((r, exit_state)) => {
                    self.pivot(q, r, dir, theta, exit_state);
                    if use_obj {
                        if self.pivots_since_refactor == 0 {
                            self.btran_obj(); // pivot refactorized: rebuild
                        } else {
                            // primal dual update: y' = y + d_q * (new row r),
                            // which zeroes the entering reduced cost
                            let d_q = dir * score_q;
                            for k in 0..self.m {
                                self.yrow[k] += d_q * self.binv[r * self.m + k];
                            }
                        }
                    }
                }
            }
        }
    }

    // --------------------------------------------------------------
    // cost jitter (dual anti-degeneracy)
    // --------------------------------------------------------------

    /// Deterministic per-column tie-breaking magnitude, a hair above the
    /// optimality tolerance so broken ties survive the ratio comparisons but
    /// the exact-cost polish only ever sees tolerance-level mispricing.
    #[inline]
    fn jitter_mag(&self, j: usize) -> f64 {
        let h = (j as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let u = 0.5 + 0.5 * ((h >> 11) as f64 / (1u64 << 53) as f64);
        1e-9 * u
    }

    /// Nudge every movable zero-cost nonbasic column strictly toward its
    /// dual-feasible side. Models with many zero-cost columns make the dual
    /// ratio test massively degenerate (whole blocks of reduced costs tie at
    /// exactly zero) and the search can spin on zero-length steps; distinct
    /// tiny magnitudes break those ties deterministically. Columns with real
    /// costs, basic columns, and free columns stay exact, so the start stays
    /// dual feasible and `btran_obj` keeps skipping zero-cost basic rows.
    /// Callers must `clear_jitter` before certifying or reporting anything.
    fn apply_jitter(&mut self) {
        if self.jitter_on {
            self.clear_jitter();
        }
        for j in 0..self.total {
            if self.obj[j] != 0.0 {
                continue;
            }
            let side = match self.state[j] {
                VState::AtLo => -1.0,
                VState::AtHi => 1.0,
                _ => continue,
            };
            if self.hi[j] - self.lo[j] <= 0.0 {
                continue; // fixed variables never price
            }
            let g = side * self.jitter_mag(j);
            self.jitter[j] = g;
            self.obj[j] += g;
        }
        self.jitter_on = true;
    }

    /// Restore the exact objective.
    fn clear_jitter(&mut self) {
        if !self.jitter_on {
            return;
        }
        for j in 0..self.total {
            if self.jitter[j] != 0.0 {
                self.obj[j] -= self.jitter[j];
                self.jitter[j] = 0.0;
            }
        }
        self.jitter_on = false;
    }

    // --------------------------------------------------------------
    // dual simplex
    // --------------------------------------------------------------

    /// Dual simplex: from a dual-feasible basis, restore primal feasibility.
    fn dual_optimize(&mut self, iters: &mut usize) -> LpStatus {
        let ftol = self.params.feas_tol;
        let ptol = self.params.piv_tol;
        let cap = self.iter_cap();
        let mut bland_mode = 0usize;
        let mut stall = 0usize;
        // pivot-magnitude floor for the entering scan; lowered to `ptol`
        // only when a fresh inverse offers nothing above `PIV_STAB`
        let mut floor = PIV_STAB;
        // duals are maintained incrementally (y += theta * binv_r per pivot)
        // and rebuilt exactly whenever the inverse is refactorized
        self.btran_obj();
        loop {
            *iters += 1;
            if *iters > cap {
                return LpStatus::IterLimit;
            }
            // leaving row: largest bound violation among basic variables
            // (smallest basic index while in Bland mode, so the anti-cycling
            // rule covers both ends of the pivot)
            let mut r_best: Option<(usize, f64, bool)> = None; // (row, viol, below)
            for i in 0..self.m {
                let b = self.basis[i] as usize;
                let below = self.lo[b] - self.xb[i];
                let above = self.xb[i] - self.hi[b];
                let (viol, is_below) = if below >= above { (below, true) } else { (above, false) };
                if viol <= ftol {
                    continue;
                }
                let better = match r_best {
                    None => true,
                    Some((ri, v, _)) => {
                        if bland_mode > 0 {
                            self.basis[i] < self.basis[ri]
                        } else {
                            viol > v
                        }
                    }
                };
                if better {
                    r_best = Some((i, viol, is_below));
                }
            }
            let (r, _, below) = match r_best {
                Some(v) => v,
                None => {
                    if self.dirty_since_refactor && self.refactorize() {
                        self.recompute_xb();
                        self.btran_obj();
                        continue; // re-verify feasibility on a fresh inverse
                    }
                    return LpStatus::Optimal; // primal feasible
                }
            };
            // row r of Binv (also the direction of the dual step)
            let binv_r: Vec<f64> = self.binv[r * self.m..(r + 1) * self.m].to_vec();
            // entering: minimize |d_j| / |alpha_j| among sign-eligible columns
            let mut q_best: Option<(usize, f64, f64, f64, f64)> = None; // (var, ratio, alpha, dir, d)
            let mut tiny_seen = false;
            for j in 0..self.total {
                let (at_lo, free) = match self.state[j] {
                    VState::Basic(_) => continue,
                    VState::AtLo => (true, false),
                    VState::AtHi => (false, false),
                    VState::Free => (false, true),
                };
                if self.hi[j] - self.lo[j] <= 0.0 {
                    continue; // fixed variables can never move
                }
                let alpha = if j < self.n {
                    let mut acc = 0.0;
                    for &(rr, a) in &self.cols[j] {
                        acc += binv_r[rr as usize] * a;
                    }
                    acc
                } else {
                    binv_r[j - self.n]
                };
                if alpha.abs() <= floor {
                    if alpha.abs() > ptol {
                        tiny_seen = true; // usable only if nothing stabler exists
                    }
                    continue;
                }
                // x_Br moves by -alpha * dir * t; need it toward the violated bound
                let need_increase = below;
                let dir = if free {
                    if need_increase { -alpha.signum() } else { alpha.signum() }
                } else if at_lo {
                    1.0
                } else {
                    -1.0
                };
                let effect = -alpha * dir; // sign of d x_Br / d t
                if need_increase && effect <= 0.0 {
                    continue;
                }
                if !need_increase && effect >= 0.0 {
                    continue;
                }
                let d = self.reduced_cost(j, true);
                let ratio = d.abs() / alpha.abs();
                let better = match q_best {
                    None => true,
                    Some((qj, qr, qa, _, _)) => {
                        if bland_mode > 0 {
                            // Bland-like: smallest eligible index wins
                            j < qj
                        } else {
                            // near-tied ratios: larger pivot element wins
                            ratio < qr - 1e-12 || (ratio < qr + 1e-12 && alpha.abs() > qa.abs())
                        }
                    }
                };
                if better {
                    q_best = Some((j, ratio, alpha, dir, d));
                }
            }
            let (q, _, alpha_q, dir, d_q) = match q_best {
                Some(v) => {
                    floor = PIV_STAB;
                    v
                }
                None => {
                    if self.pivots_since_refactor > 0 && self.refactorize() {
                        // the alphas came from a drifted inverse: rebuild
                        // and rescan before drawing any conclusion
                        self.recompute_xb();
                        self.btran_obj();
                        floor = PIV_STAB;
                        continue;
                    }
                    if tiny_seen && floor > ptol {
                        // nothing above the stability floor even on a fresh
                        // inverse: accept a sub-threshold pivot (the pivot
                        // path rebuilds immediately afterwards)
                        floor = ptol;
                        continue;
                    }
                    return LpStatus::Infeasible; // dual unbounded
                }
            };
            self.ftran(q);
            let w_r = self.wcol[r];
            if w_r.abs() <= ptol {
                // numerically unusable pivot: on a stale inverse rebuild and
                // retry; on a fresh one give up rather than loop
                if self.pivots_since_refactor > 0 && self.refactorize() {
                    self.recompute_xb();
                    self.btran_obj();
                    continue;
                }
                return LpStatus::IterLimit;
            }
            let exit_bound = if below { self.lo[self.basis[r] as usize] } else { self.hi[self.basis[r] as usize] };
            let exit_state = if below { VState::AtLo } else { VState::AtHi };
            let t = (self.xb[r] - exit_bound) / (dir * w_r);
            if t < -ftol {
                // alpha / w_r sign inconsistency: only drift can cause it
                if self.pivots_since_refactor > 0 && self.refactorize() {
                    self.recompute_xb();
                    self.btran_obj();
                    continue;
                }
                return LpStatus::IterLimit;
            }
            if t.abs() <= ptol {
                stall += 1;
                if stall > 40 && bland_mode == 0 {
                    bland_mode = 400;
                }
                if stall > 5000 {
                    // thousands of zero-length steps: hand control back to
                    // the caller's fallback path instead of burning the cap
                    return LpStatus::IterLimit;
                }
            } else {
                stall = 0;
            }
            if bland_mode > 0 {
                bland_mode -= 1;
            }
            self.pivot(q, r, dir, t.max(0.0), exit_state);
            if self.pivots_since_refactor == 0 {
                self.btran_obj(); // the pivot refactorized: rebuild exactly
            } else {
                // dual step: y' = y + (d_q / alpha_q) * (old row r of Binv),
                // which zeroes the entering column's reduced cost
                let theta_d = d_q / alpha_q;
                for k in 0..self.m {
                    self.yrow[k] += theta_d * binv_r[k];
                }
            }
        }
    }

    // --------------------------------------------------------------
    // entry points
    // --------------------------------------------------------------

    /// Reset to the slack basis with nonbasic placement `dual_first`:
    /// when true, placement follows objective signs (dual-feasible start)
    /// if possible. Returns false if that placement is impossible.
    fn reset_basis(&mut self, dual_first: bool) -> bool {
        let otol = self.params.opt_tol;
        for j in 0..self.n {
            let (lo_f, hi_f) = (self.lo[j].is_finite(), self.hi[j].is_finite());
            self.state[j] = if dual_first {
                if self.obj[j] > otol {
                    if hi_f {
                        VState::AtHi
                    } else {
                        return false;
                    }
                } else if self.obj[j] < -otol {
                    if lo_f {
                        VState::AtLo
                    } else {
                        return false;
                    }
                } else if lo_f {
                    VState::AtLo
                } else if hi_f {
                    VState::AtHi
                } else {
                    VState::Free
                }
            } else if lo_f {
                VState::AtLo
            } else if hi_f {
                VState::AtHi
            } else {
                VState::Free
            };
        }
        for i in 0..self.m {
            let s = self.n + i;
            self.basis[i] = s as u32;
            self.state[s] = VState::Basic(i as u32);
        }
        self.binv.fill(0.0);
        for i in 0..self.m {
            self.binv[i * self.m + i] = 1.0;
        }
        self.pivots_since_refactor = 0;
        self.dirty_since_refactor = false;
        self.recompute_xb();
        true
    }

    /// Cold solve against the current bounds.
    pub fn solve_fresh(&mut self) -> LpOutcome {
        let mut iters = 0usize;
        let mut status = if self.reset_basis(true) {
            self.apply_jitter();
            let s = self.dual_optimize(&mut iters);
            self.clear_jitter();
            match s {
                // polish: certifies optimality against the true objective,
                // on its own iteration budget
                LpStatus::Optimal => {
                    let spent = iters;
                    iters = 0;
                    let st = self.primal_phase(true, &mut iters);
                    iters += spent;
                    st
                }
                other => other,
            }
        } else {
            self.reset_basis(false);
            match self.primal_phase(false, &mut iters) {
                LpStatus::Optimal => self.primal_phase(true, &mut iters),
                other => other,
            }
        };
        if status == LpStatus::IterLimit {
            // last resort: plain primal from the slack basis, on a fresh
            // iteration budget (the failed attempts exhausted theirs)
            let spent = iters;
            iters = 0;
            self.reset_basis(false);
            status = match self.primal_phase(false, &mut iters) {
                LpStatus::Optimal => self.primal_phase(true, &mut iters),
                other => other,
            };
            iters += spent;
        }
        self.solved_once = true;
        self.outcome(status, iters)
    }

    /// Re-solve after bound changes only. The current basis stays dual
    /// feasible, so the dual simplex finishes the job. Falls back to a cold
    /// solve if the engine has never solved.
    pub fn reoptimize_dual(&mut self) -> LpOutcome {
        if !self.solved_once {
            return self.solve_fresh();
        }
        let mut iters = 0usize;
        self.recompute_xb();
        self.apply_jitter();
        let s = self.dual_optimize(&mut iters);
        self.clear_jitter();
        let status = match s {
            LpStatus::Optimal => {
                // polish on its own iteration budget
                let spent = iters;
                iters = 0;
                let st = self.primal_phase(true, &mut iters);
                iters += spent;
                st
            }
            other => other,
        };
        match status {
            // an iteration limit on a warm basis usually means drift;
            // retry cold before giving up
            LpStatus::IterLimit => self.solve_fresh(),
            _ => self.outcome(status, iters),
        }
    }

    /// Primal re-optimize from the current (primal-feasible) basis after
    /// objective changes, or continue after a failed warm start.
    pub fn primal_optimize(&mut self) -> LpOutcome {
        let mut iters = 0usize;
        let status = match self.primal_phase(false, &mut iters) {
            LpStatus::Optimal => self.primal_phase(true, &mut iters),
            other => other,
        };
        self.outcome(status, iters)
    }

    fn outcome(&mut self, status: LpStatus, iterations: usize) -> LpOutcome {
        let mut x = vec![0.0; self.n];
        for j in 0..self.n {
            x[j] = self.nb_val(j);
        }
        let objective = (0..self.n).map(|j| self.obj[j] * x[j]).sum();
        self.btran_obj();
        let duals = self.yrow.clone();
        let mut reduced_costs = vec![0.0; self.n];
        for j in 0..self.n {
            reduced_costs[j] = match self.state[j] {
                VState::Basic(_) => 0.0,
                _ => self.reduced_cost(j, true),
            };
        }
        LpOutcome { status, objective, x, duals, reduced_costs, iterations }
    }

    /// Largest bound violation over basic variables (diagnostics).
    pub fn primal_infeasibility(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            let b = self.basis[i] as usize;
            worst = worst.max(self.lo[b] - self.xb[i]).max(self.xb[i] - self.hi[b]);
        }
        worst
    }
}

// ==================================================================
// tests
// ==================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, RowSense};

    fn solve(m: &Model) -> LpOutcome {
        Simplex::new(m, SimplexParams::default()).solve_fresh()
    }

    #[test]
    fn maximizes_simple_bounded_lp() {
        // max 3x + 2y  s.t. x + y <= 4, x <= 3, y <= 3  -> x=3, y=1, obj=11
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, 3.0, 3.0);
        let y = m.add_var("y", 0.0, 3.0, 2.0);
        m.add_row("cap", RowSense::Le, 4.0, &[(x, 1.0), (y, 1.0)]);
        let out = solve(&m);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 11.0).abs() < 1e-9, "obj {}", out.objective);
        assert!((out.x[0] - 3.0).abs() < 1e-9);
        assert!((out.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn handles_ge_and_eq_rows() {
        // max x + y  s.t. x + 2y = 6, x - y >= 0, 0<=x,y<=5 -> y=2,x=2? check:
        // x = 6-2y, x>=y -> 6-2y>=y -> y<=2; obj = 6-2y+y = 6-y -> y=0, x=6>5
        // so x<=5 -> y>=0.5; obj=6-y maximized at y=0.5, x=5 -> 5.5
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, 5.0, 1.0);
        let y = m.add_var("y", 0.0, 5.0, 1.0);
        m.add_row("mix", RowSense::Eq, 6.0, &[(x, 1.0), (y, 2.0)]);
        m.add_row("ord", RowSense::Ge, 0.0, &[(x, 1.0), (y, -1.0)]);
        let out = solve(&m);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 5.5).abs() < 1e-9, "obj {}", out.objective);
        assert!((out.x[0] - 5.0).abs() < 1e-9);
        assert!((out.x[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, 1.0, 1.0);
        m.add_row("hi", RowSense::Ge, 2.0, &[(x, 1.0)]);
        let out = solve(&m);
        assert_eq!(out.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, f64::INFINITY, 1.0);
        let y = m.add_var("y", 0.0, f64::INFINITY, 0.0);
        m.add_row("link", RowSense::Le, 3.0, &[(x, 1.0), (y, -1.0)]);
        let out = solve(&m);
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn negative_bounds_and_minimization_by_negation() {
        // min x - y with -2<=x<=2, -2<=y<=2, x+y>=-1  ==  max -x + y
        // optimum: x as small as allowed, y as large: x+y>=-1 -> x>=-3 -> x=-2? x=-2,y=2 ok
        let mut m = Model::new();
        let x = m.add_var("x", -2.0, 2.0, -1.0);
        let y = m.add_var("y", -2.0, 2.0, 1.0);
        m.add_row("floor", RowSense::Ge, -1.0, &[(x, 1.0), (y, 1.0)]);
        let out = solve(&m);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 4.0).abs() < 1e-9);
        assert!((out.x[0] + 2.0).abs() < 1e-9);
        assert!((out.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn free_variable_enters_basis() {
        // max -|ish| with free t: max t s.t. t <= 4, t >= -10 via rows
        let mut m = Model::new();
        let t = m.add_var("t", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        m.add_row("ub", RowSense::Le, 4.0, &[(t, 1.0)]);
        m.add_row("lb", RowSense::Ge, -10.0, &[(t, 1.0)]);
        let out = solve(&m);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn duals_price_binding_rows() {
        // max 3x+2y, x+y<=4, x<=3, y<=3 (rows): dual of cap row = 2 at optimum
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, f64::INFINITY, 3.0);
        let y = m.add_var("y", 0.0, f64::INFINITY, 2.0);
        m.add_row("cap", RowSense::Le, 4.0, &[(x, 1.0), (y, 1.0)]);
        m.add_row("xcap", RowSense::Le, 3.0, &[(x, 1.0)]);
        m.add_row("ycap", RowSense::Le, 3.0, &[(y, 1.0)]);
        let out = solve(&m);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 11.0).abs() < 1e-9);
        assert!((out.duals[0] - 2.0).abs() < 1e-9, "duals {:?}", out.duals);
        assert!((out.duals[1] - 1.0).abs() < 1e-9);
        assert!(out.duals[2].abs() < 1e-9);
    }

    #[test]
    fn reoptimize_after_bound_change_matches_fresh() {
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, 3.0, 3.0);
        let y = m.add_var("y", 0.0, 3.0, 2.0);
        m.add_row("cap", RowSense::Le, 4.0, &[(x, 1.0), (y, 1.0)]);
        let mut eng = Simplex::new(&m, SimplexParams::default());
        let first = eng.solve_fresh();
        assert_eq!(first.status, LpStatus::Optimal);
        // now force x <= 1 and warm re-solve
        eng.set_var_bounds(0, 0.0, 1.0);
        let warm = eng.reoptimize_dual();
        assert_eq!(warm.status, LpStatus::Optimal);
        // fresh solve of the tightened model for reference
        m.set_bounds(x, 0.0, 1.0);
        let fresh = solve(&m);
        assert!((warm.objective - fresh.objective).abs() < 1e-9);
        assert!((warm.objective - 9.0).abs() < 1e-9); // x=1,y=3
    }
}
