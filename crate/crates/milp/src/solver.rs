//! Branch & bound for mixed-integer linear programs.
//!
//! Depth-first plunging with periodic best-bound restarts. Each node carries
//! the complete bound set of the integer variables, so restoring an arbitrary
//! node is a cheap bounds replay followed by a warm dual re-solve (bound
//! changes never break dual feasibility of the engine's resident basis).
//!
//! Branching picks the highest `priority` class first and the most fractional
//! variable within the class; ties fall to the lowest index, which keeps runs
//! deterministic.

use std::time::{Duration, Instant};

use crate::model::Model;
use crate::simplex::{LpOutcome, LpStatus, Simplex, SimplexParams};

// ==================================================================
// parameters, status, result
// ==================================================================

#[derive(Debug, Clone)]
pub struct MilpParams {
    /// A value within this distance of an integer counts as integral.
    pub int_tol: f64,
    /// Absolute optimality gap at which the search stops.
    pub gap_abs: f64,
    /// Relative optimality gap (fraction of the incumbent magnitude).
    pub gap_rel: f64,
    /// Node budget (0 = unlimited).
    pub max_nodes: usize,
    /// Wall-clock budget.
    pub time_limit: Option<Duration>,
    /// At dive boundaries, jump to the best-bound open node instead of the
    /// DFS top every this many dives (0 = pure DFS).
    pub best_bound_every: usize,
    pub simplex: SimplexParams,
}

impl Default for MilpParams {
    fn default() -> Self {
        Self {
            int_tol: 1e-6,
            gap_abs: 1e-6,
            gap_rel: 1e-6,
            max_nodes: 0,
            time_limit: None,
            best_bound_every: 64,
            simplex: SimplexParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Proven optimal within the configured gap.
    Optimal,
    /// A feasible incumbent exists but a budget stopped the proof.
    Feasible,
    Infeasible,
    Unbounded,
    /// A budget was exhausted before any feasible point was found.
    NoSolution,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub nodes: usize,
    pub lp_iterations: usize,
    /// Nodes whose LP could not be solved within its iteration budget;
    /// their bounds stay in the gap, blocking a false optimality claim.
    pub abandoned: usize,
    pub elapsed: Duration,
    /// Best remaining upper bound when the search stopped.
    pub best_bound: f64,
    /// Final |best_bound - objective| (0 when proven optimal exactly).
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub stats: SolveStats,
}

// ==================================================================
// search
// ==================================================================

struct Node {
    /// (var index, lo, hi) for every integer variable.
    bounds: Vec<(u32, f64, f64)>,
    /// Parent LP objective: an upper bound on anything in this subtree.
    bound: f64,
}

/// Solve the LP relaxation only.
pub fn solve_lp(model: &Model, params: &SimplexParams) -> LpOutcome {
    Simplex::new(model, params.clone()).solve_fresh()
}

/// Solve a mixed-integer model (maximization).
pub fn solve(model: &Model, params: &MilpParams) -> Solution {
    let t0 = Instant::now();
    let int_vars: Vec<u32> = model.integer_vars().iter().map(|v| v.index() as u32).collect();
    let mut eng = Simplex::new(model, params.simplex.clone());
    let mut stats = SolveStats::default();

    let root = eng.solve_fresh();
    stats.lp_iterations += root.iterations;
    stats.nodes = 1;
    match root.status {
        LpStatus::Infeasible => {
            stats.elapsed = t0.elapsed();
            return Solution { status: SolveStatus::Infeasible, objective: f64::NEG_INFINITY, x: root.x, stats };
        }
        LpStatus::Unbounded => {
            stats.elapsed = t0.elapsed();
            return Solution { status: SolveStatus::Unbounded, objective: f64::INFINITY, x: root.x, stats };
        }
        LpStatus::IterLimit => {
            stats.elapsed = t0.elapsed();
            return Solution { status: SolveStatus::NoSolution, objective: f64::NEG_INFINITY, x: root.x, stats };
        }
        LpStatus::Optimal => {}
    }

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut exhaustive = true; // false once any node had to be abandoned unsolved
    let root_bounds: Vec<(u32, f64, f64)> = int_vars
        .iter()
        .map(|&j| {
            let (lo, hi) = eng.var_bounds(j as usize);
            (j, lo, hi)
        })
        .collect();

    if let Some(frac) = pick_branch_var(model, &root.x, &int_vars, params.int_tol) {
        let mut open: Vec<Node> = Vec::new();
        push_children(&mut open, &root_bounds, &root, frac);
        let mut dives = 0usize;
        let mut mid_dive = true;
        // bounds of nodes abandoned unsolved must keep counting toward the
        // gap, or an unlucky iteration limit could masquerade as optimality
        let mut lost_bound = f64::NEG_INFINITY;

        loop {
            // a dive follows the near child LIFO until the node stops branching;
            // only at dive boundaries may the search jump to the best-bound
            // node, otherwise deep trees never produce an incumbent
            let node = if mid_dive {
                open.pop()
            } else {
                dives += 1;
                if params.best_bound_every > 0 && dives % params.best_bound_every == 0 {
                    pop_best_bound(&mut open)
                } else {
                    open.pop()
                }
            };
            let node = match node {
                Some(n) => n,
                None => break,
            };
            mid_dive = false;
            // budget checks
            if params.max_nodes > 0 && stats.nodes >= params.max_nodes {
                exhaustive = false;
                lost_bound = lost_bound.max(node.bound);
                break;
            }
            if let Some(tl) = params.time_limit {
                if t0.elapsed() >= tl {
                    exhaustive = false;
                    lost_bound = lost_bound.max(node.bound);
                    break;
                }
            }
            // bound-based prune before paying for the LP
            if let Some((best, _)) = &incumbent {
                if node.bound <= prune_cut(*best, params) {
                    continue;
                }
            }
            stats.nodes += 1;
            for &(j, lo, hi) in &node.bounds {
                eng.set_var_bounds(j as usize, lo, hi);
            }
            let out = eng.reoptimize_dual();
            stats.lp_iterations += out.iterations;
            match out.status {
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => {
                    // cannot happen with bounded integer boxes; treat as unsolved
                    exhaustive = false;
                    stats.abandoned += 1;
                    lost_bound = lost_bound.max(node.bound);
                    continue;
                }
                LpStatus::IterLimit => {
                    exhaustive = false;
                    stats.abandoned += 1;
                    lost_bound = lost_bound.max(node.bound);
                    continue;
                }
                LpStatus::Optimal => {}
            }
            if let Some((best, _)) = &incumbent {
                if out.objective <= prune_cut(*best, params) {
                    continue;
                }
            }
            match pick_branch_var(model, &out.x, &int_vars, params.int_tol) {
                None => {
                    // integral: new incumbent
                    let mut x = out.x.clone();
                    for &j in &int_vars {
                        x[j as usize] = x[j as usize].round();
                    }
                    if incumbent.as_ref().map_or(true, |(best, _)| out.objective > *best) {
                        incumbent = Some((out.objective, x));
                    }
                }
                Some(frac) => {
                    push_children(&mut open, &node.bounds, &out, frac);
                    mid_dive = true;
                }
            }
        }
        // best bound left open or abandoned (for gap reporting)
        let open_bound = open
            .iter()
            .map(|n| n.bound)
            .fold(lost_bound, f64::max);
        stats.best_bound = match &incumbent {
            Some((best, _)) => best.max(open_bound),
            None => open_bound.max(root.objective),
        };
        if !open.is_empty() {
            exhaustive = false;
        }
    } else {
        // root already integral
        let mut x = root.x.clone();
        for &j in &int_vars {
            x[j as usize] = x[j as usize].round();
        }
        incumbent = Some((root.objective, x));
        stats.best_bound = root.objective;
    }

    stats.elapsed = t0.elapsed();
    match incumbent {
        Some((obj, x)) => {
            if stats.best_bound < obj {
                stats.best_bound = obj;
            }
            stats.gap = (stats.best_bound - obj).max(0.0);
            let proven = exhaustive || stats.gap <= params.gap_abs.max(params.gap_rel * obj.abs());
            Solution {
                status: if proven { SolveStatus::Optimal } else { SolveStatus::Feasible },
                objective: obj,
                x,
                stats,
            }
        }
        None => {
            let status = if exhaustive { SolveStatus::Infeasible } else { SolveStatus::NoSolution };
            Solution { status, objective: f64::NEG_INFINITY, x: Vec::new(), stats }
        }
    }
}

/// Objective value below which a node cannot beat the incumbent.
#[inline]
fn prune_cut(best: f64, params: &MilpParams) -> f64 {
    best + params.gap_abs.max(params.gap_rel * best.abs())
}

struct BranchPick {
    var: u32,
    value: f64,
}

/// Most fractional integer variable in the highest priority class, or None
/// if the point is integral.
fn pick_branch_var(model: &Model, x: &[f64], int_vars: &[u32], int_tol: f64) -> Option<BranchPick> {
    let mut best: Option<(i32, f64, u32, f64)> = None; // (priority, fractionality, var, value)
    for &j in int_vars {
        let v = x[j as usize];
        let frac = (v - v.round()).abs();
        if frac <= int_tol {
            continue;
        }
        let dist = (v - v.floor()).min(v.ceil() - v); // distance to nearest integer
        let prio = model.var(crate::model::VarId(j)).priority;
        let better = match best {
            None => true,
            Some((bp, bf, _, _)) => prio > bp || (prio == bp && dist > bf + 1e-12),
        };
        if better {
            best = Some((prio, dist, j, v));
        }
    }
    best.map(|(_, _, var, value)| BranchPick { var, value })
}

/// Push the floor/ceil children of a node; the child nearer the LP value is
/// pushed last so DFS plunges toward it first.
fn push_children(open: &mut Vec<Node>, bounds: &[(u32, f64, f64)], parent: &LpOutcome, pick: BranchPick) {
    let (floor, ceil) = (pick.value.floor(), pick.value.ceil());
    let mk = |new_lo: Option<f64>, new_hi: Option<f64>| -> Option<Node> {
        let mut b = bounds.to_vec();
        for e in b.iter_mut() {
            if e.0 == pick.var {
                if let Some(l) = new_lo {
                    e.1 = l.max(e.1);
                }
                if let Some(h) = new_hi {
                    e.2 = h.min(e.2);
                }
                if e.1 > e.2 {
                    return None; // empty box
                }
            }
        }
        Some(Node { bounds: b, bound: parent.objective })
    };
    let down = mk(None, Some(floor));
    let up = mk(Some(ceil), None);
    let near_is_up = pick.value - floor >= 0.5;
    // push far side first, near side last (popped first)
    let (far, near) = if near_is_up { (down, up) } else { (up, down) };
    if let Some(n) = far {
        open.push(n);
    }
    if let Some(n) = near {
        open.push(n);
    }
}

/// Remove and return the open node with the best (largest) bound.
fn pop_best_bound(open: &mut Vec<Node>) -> Option<Node> {
    if open.is_empty() {
        return None;
    }
    let mut best = 0usize;
    for (i, n) in open.iter().enumerate() {
        if n.bound > open[best].bound {
            best = i;
        }
    }
    Some(open.swap_remove(best))
}

// ==================================================================
// tests
// ==================================================================
