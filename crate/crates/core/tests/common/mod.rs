//! Checks shared by the structural tests and the acceptance run.

#![allow(dead_code)]

use std::collections::BTreeMap;

use cmdfs::degree::DegreeSequence;
use cmdfs::graph::{Explorer, Status, StepKind};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub type Multigraph = Vec<(u32, u32)>;

/// Sorted edge list with each edge as `(min, max)`.
pub fn canonical(edges: &[(u32, u32)]) -> Multigraph {
    let mut out: Multigraph = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    out.sort_unstable();
    out
}

/// Number of perfect matchings of the half-edges of `degrees` yielding each multigraph.
pub fn matching_oracle(degrees: &[u32]) -> BTreeMap<Multigraph, usize> {
    fn rec(rest: &mut Vec<u32>, edges: &mut Multigraph, out: &mut BTreeMap<Multigraph, usize>) {
        if rest.is_empty() {
            *out.entry(canonical(edges)).or_default() += 1;
            return;
        }
        let a = rest.remove(0);
        for i in 0..rest.len() {
            let b = rest.remove(i);
            edges.push((a, b));
            rec(rest, edges, out);
            edges.pop();
            rest.insert(i, b);
        }
        rest.insert(0, a);
    }
    let mut half_edges: Vec<u32> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v as u32, d as usize))
        .collect();
    let mut out = BTreeMap::new();
    rec(&mut half_edges, &mut Vec::new(), &mut out);
    out
}

/// Chi-squared p-value of the multigraphs built by `samples` seeded
/// explorations of `degrees` against the exhaustive matching count.
pub fn matching_p_value(degrees: &[u32], samples: u64) -> Result<f64, String> {
    let oracle = matching_oracle(degrees);
    let total: usize = oracle.values().sum();
    let seq = DegreeSequence::new(degrees.to_vec()).map_err(|e| e.to_string())?;
    let mut seen: BTreeMap<Multigraph, u64> = BTreeMap::new();
    for seed in 0..samples {
        *seen
            .entry(canonical(&Explorer::new(&seq, seed).run().edges))
            .or_default() += 1;
    }
    if let Some(g) = seen.keys().find(|g| !oracle.contains_key(*g)) {
        return Err(format!("impossible multigraph {g:?}"));
    }
    let chi2: f64 = oracle
        .iter()
        .map(|(g, &ways)| {
            let expected = samples as f64 * ways as f64 / total as f64;
            (seen.get(g).copied().unwrap_or(0) as f64 - expected).powi(2) / expected
        })
        .sum();
    let df = (oracle.len() - 1) as f64;
    Ok(1.0 - ChiSquared::new(df).map_err(|e| e.to_string())?.cdf(chi2))
}

/// Induced degree law of the currently sleeping vertices in the final multigraph.
fn induced_histogram(explorer: &Explorer, final_edges: &[(u32, u32)]) -> Vec<u64> {
    let n = explorer.vertex_count();
    let asleep: Vec<bool> = (0..n as u32)
        .map(|v| explorer.status(v) == Status::Sleeping)
        .collect();
    let mut deg = vec![0u64; n];
    for &(u, v) in final_edges {
        if asleep[u as usize] && asleep[v as usize] {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
    }
    let mut hist = vec![0u64; explorer.histogram().len()];
    for v in (0..n).filter(|&v| asleep[v]) {
        hist[deg[v] as usize] += 1;
    }
    hist
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

/// Steps one exploration and checks every structural invariant after each step.
pub fn check_exploration(seq: &DegreeSequence, seed: u64) -> Result<(), String> {
    let n = seq.len();
    let total = seq.total_degree() as usize;
    let final_trace = Explorer::new(seq, seed).run();
    let mut ex = Explorer::new(seq, seed);
    let mut height = 0usize;
    let mut steps = 0usize;
    while let Some(kind) = ex.step() {
        steps += 1;
        let next = ex.height();
        ensure!(
            next.abs_diff(height) == 1,
            "step {steps}: contour jumped {height} -> {next}"
        );
        ensure!(
            kind.is_up() == (next > height),
            "step {steps}: step kind disagrees with contour"
        );
        ensure!(
            final_trace.contour[steps] as usize == next,
            "step {steps}: replay differs"
        );
        height = next;
        ensure!(
            ex.sleeping_count() + ex.height() + ex.retired_count() == n,
            "step {steps}: vertex classes do not partition V"
        );
        let active: Vec<u32> = ex.active_vertices().collect();
        ensure!(
            active.iter().all(|&v| ex.status(v) == Status::Active),
            "step {steps}: stale active list"
        );
        ensure!(
            ex.unmatched_total() + 2 * ex.edges().len() == total,
            "step {steps}: half-edges not conserved"
        );
        for v in 0..n as u32 {
            ensure!(
                ex.status(v) == Status::Sleeping || ex.unmatched_at(v) == 0,
                "step {steps}: unmatched half-edge at explored vertex {v}"
            );
        }
        if let StepKind::Visit { parent, child } = kind {
            ensure!(
                active[active.len() - 2] == parent,
                "step {steps}: parent is not below child"
            );
            ensure!(
                ex.edges()
                    .iter()
                    .any(|&e| e == (parent, child) || e == (child, parent)),
                "step {steps}: active list is not a path"
            );
        }
        ensure!(
            ex.histogram() == induced_histogram(&ex, &final_trace.edges).as_slice(),
            "step {steps}: sleeping-degree histogram wrong"
        );
    }
    ensure!(steps == 2 * n, "{steps} steps for {n} vertices");
    ensure!(ex.is_done(), "exploration stopped early");
    ensure!(
        final_trace.realized_degrees() == seq.degrees(),
        "realized degrees differ"
    );
    Ok(())
}

/// Two runs with the same seeds agree exactly.
pub fn check_reproducible(seq: &DegreeSequence, seed: u64) -> Result<(), String> {
    let a = Explorer::new(seq, seed).run();
    let b = Explorer::new(seq, seed).run();
    ensure!(
        a.contour == b.contour && a.edges == b.edges,
        "seed {seed} not reproducible"
    );
    Ok(())
}
