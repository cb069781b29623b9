//! The construct-while-exploring depth-first search.
//!
//! Half-edges are paired lazily: a vertex pairs all of its still-unmatched
//! half-edges, each with a uniformly chosen unmatched half-edge, at the
//! moment it joins the active list. Partners other than the vertex itself
//! are remembered in its pending list `m_v`, shuffled, and visited in that
//! order while they are still asleep.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::degree::DegreeSequence;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sleeping,
    Active,
    Retired,
}

/// What a single exploration step did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// The active list was empty; a uniform sleeping vertex became a new root.
    Wake(u32),
    /// The top vertex had a sleeping pending neighbour, now pushed.
    Visit { parent: u32, child: u32 },
    /// The top vertex had no sleeping pending neighbour and was popped.
    Retire(u32),
}

impl StepKind {
    pub fn is_up(self) -> bool {
        !matches!(self, StepKind::Retire(_))
    }
}

/// Step-by-step record of the sleeping-degree histogram.
///
/// The degree of a sleeping vertex in the graph induced by sleeping vertices
/// is its initial degree minus its occurrences in active pending lists.
#[derive(Clone, Debug, Default)]
pub struct DegreeLog {
    initial: Vec<u64>,
    /// Low 31 bits: a degree bin. High bit clear: one vertex leaves that bin.
    /// High bit set: one vertex moves from that bin to the bin below.
    events: Vec<u32>,
    /// `step_ends[n]` is the end of step `n + 1`'s events.
    step_ends: Vec<u32>,
}

const SHIFT_FLAG: u32 = 1 << 31;

impl DegreeLog {
    fn apply(hist: &mut [u64], event: u32) {
        let bin = (event & !SHIFT_FLAG) as usize;
        hist[bin] -= 1;
        if event & SHIFT_FLAG != 0 {
            hist[bin - 1] += 1;
        }
    }

    /// Number of recorded steps.
    pub fn steps(&self) -> usize {
        self.step_ends.len()
    }

    /// Calls `visit(step, histogram)` for each step in `steps` (non-decreasing,
    /// each at most [`DegreeLog::steps`]), replaying events in one pass.
    pub fn replay(&self, steps: &[usize], mut visit: impl FnMut(usize, &[u64])) {
        let mut hist = self.initial.clone();
        let mut done = 0usize;
        let mut cursor = 0usize;
        for &step in steps {
            assert!(step >= done, "replay steps must be non-decreasing");
            assert!(
                step <= self.steps(),
                "step {step} beyond the recorded trace"
            );
            let end = if step == 0 {
                0
            } else {
                self.step_ends[step - 1] as usize
            };
            for &event in &self.events[cursor..end] {
                Self::apply(&mut hist, event);
            }
            cursor = end;
            done = step;
            visit(step, &hist);
        }
    }

    pub fn histograms_at(&self, steps: &[usize]) -> Vec<Vec<u64>> {
        let mut out = Vec::with_capacity(steps.len());
        self.replay(steps, |_, hist| out.push(hist.to_vec()));
        out
    }
}

/// State of one exploration; advance it with [`Explorer::step`].
pub struct Explorer {
    degrees: Vec<u32>,
    owner: Vec<u32>,
    first: Vec<u32>,
    pool: Vec<u32>,
    pool_pos: Vec<u32>,
    sleeping: Vec<u32>,
    sleep_pos: Vec<u32>,
    status: Vec<Status>,
    pending: Vec<u32>,
    /// Active list: `(vertex, start of its pending list in partners)`.
    frames: Vec<(u32, u32)>,
    partners: Vec<u32>,
    edges: Vec<(u32, u32)>,
    histogram: Vec<u64>,
    log: DegreeLog,
    retired: usize,
    rng: ChaCha8Rng,
}

impl Explorer {
    pub fn new(seq: &DegreeSequence, seed: u64) -> Self {
        let degrees = seq.degrees().to_vec();
        let n = degrees.len();
        let total = seq.total_degree();
        assert!(
            total < NONE as u64,
            "total degree does not fit the half-edge index"
        );
        let mut owner = Vec::with_capacity(total as usize);
        let mut first = Vec::with_capacity(n + 1);
        for (v, &d) in degrees.iter().enumerate() {
            first.push(owner.len() as u32);
            owner.extend(std::iter::repeat_n(v as u32, d as usize));
        }
        first.push(owner.len() as u32);
        let mut histogram = vec![0u64; seq.max_degree() as usize + 1];
        for &d in &degrees {
            histogram[d as usize] += 1;
        }
        Explorer {
            pool: (0..total as u32).collect(),
            pool_pos: (0..total as u32).collect(),
            sleeping: (0..n as u32).collect(),
            sleep_pos: (0..n as u32).collect(),
            status: vec![Status::Sleeping; n],
            pending: vec![0; n],
            frames: Vec::new(),
            partners: Vec::new(),
            edges: Vec::with_capacity(total as usize / 2),
            log: DegreeLog {
                initial: histogram.clone(),
                events: Vec::with_capacity(total as usize + n),
                step_ends: Vec::with_capacity(2 * n),
            },
            histogram,
            retired: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            degrees,
            owner,
            first,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    /// Current contour value `|A_n|`.
    pub fn height(&self) -> usize {
        self.frames.len()
    }

    pub fn steps_taken(&self) -> usize {
        self.log.steps()
    }

    pub fn is_done(&self) -> bool {
        self.frames.is_empty() && self.sleeping.is_empty()
    }

    pub fn status(&self, v: u32) -> Status {
        self.status[v as usize]
    }

    pub fn sleeping_count(&self) -> usize {
        self.sleeping.len()
    }

    pub fn retired_count(&self) -> usize {
        self.retired
    }

    /// Active vertices from root to top.
    pub fn active_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        self.frames.iter().map(|&(v, _)| v)
    }

    /// Pending list of the `k`-th active vertex, including entries that have
    /// since been visited (they are dropped lazily when reached).
    pub fn pending_list(&self, k: usize) -> &[u32] {
        let start = self.frames[k].1 as usize;
        let end = self
            .frames
            .get(k + 1)
            .map_or(self.partners.len(), |f| f.1 as usize);
        &self.partners[start..end]
    }

    /// Occurrences of sleeping vertex `v` in active pending lists.
    pub fn pending_count(&self, v: u32) -> u32 {
        self.pending[v as usize]
    }

    /// Number of unmatched half-edges at `v`.
    pub fn unmatched_at(&self, v: u32) -> u32 {
        let (lo, hi) = (self.first[v as usize], self.first[v as usize + 1]);
        (lo..hi)
            .filter(|&h| self.pool_pos[h as usize] != NONE)
            .count() as u32
    }

    pub fn unmatched_total(&self) -> usize {
        self.pool.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Live sleeping-degree histogram.
    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.degrees[v as usize]
    }

    /// Advances one step; `None` once every vertex has been retired.
    pub fn step(&mut self) -> Option<StepKind> {
        let kind = match self.frames.last().copied() {
            None => {
                if self.sleeping.is_empty() {
                    return None;
                }
                let v = self.sleeping[self.rng.random_range(0..self.sleeping.len())];
                self.activate(v);
                StepKind::Wake(v)
            }
            Some((u, start)) => {
                let mut next = None;
                while self.partners.len() > start as usize {
                    let w = self.partners.pop().expect("non-empty");
                    if self.status[w as usize] == Status::Sleeping {
                        next = Some(w);
                        break;
                    }
                }
                match next {
                    Some(w) => {
                        self.activate(w);
                        StepKind::Visit {
                            parent: u,
                            child: w,
                        }
                    }
                    None => {
                        self.frames.pop();
                        self.status[u as usize] = Status::Retired;
                        self.retired += 1;
                        StepKind::Retire(u)
                    }
                }
            }
        };
        self.log.step_ends.push(self.log.events.len() as u32);
        Some(kind)
    }

    fn induced_degree(&self, v: u32) -> u32 {
        self.degrees[v as usize] - self.pending[v as usize]
    }

    fn take_half_edge(&mut self, h: u32) {
        let pos = self.pool_pos[h as usize] as usize;
        let last = self.pool.pop().expect("half-edge pool is non-empty");
        if last != h {
            self.pool[pos] = last;
            self.pool_pos[last as usize] = pos as u32;
        }
        self.pool_pos[h as usize] = NONE;
    }

    /// Moves sleeping `v` to the top of the active list and pairs its half-edges.
    fn activate(&mut self, v: u32) {
        let vi = v as usize;
        let bin = self.induced_degree(v);
        self.histogram[bin as usize] -= 1;
        self.log.events.push(bin);

        let pos = self.sleep_pos[vi] as usize;
        let last = self.sleeping.pop().expect("v is sleeping");
        if last != v {
            self.sleeping[pos] = last;
            self.sleep_pos[last as usize] = pos as u32;
        }
        self.sleep_pos[vi] = NONE;
        self.status[vi] = Status::Active;

        let start = self.partners.len();
        for h in self.first[vi]..self.first[vi + 1] {
            if self.pool_pos[h as usize] == NONE {
                continue;
            }
            self.take_half_edge(h);
            let partner = self.pool[self.rng.random_range(0..self.pool.len())];
            self.take_half_edge(partner);
            let w = self.owner[partner as usize];
            self.edges.push((v, w));
            if w != v {
                debug_assert_eq!(self.status[w as usize], Status::Sleeping);
                let bin = self.induced_degree(w);
                self.histogram[bin as usize] -= 1;
                self.histogram[bin as usize - 1] += 1;
                self.log.events.push(bin | SHIFT_FLAG);
                self.pending[w as usize] += 1;
                self.partners.push(w);
            }
        }
        self.partners[start..].shuffle(&mut self.rng);
        self.frames.push((v, start as u32));
    }

    /// Runs to completion and returns the trace.
    pub fn run(mut self) -> ContourTrace {
        let n = self.vertex_count();
        let mut contour = Vec::with_capacity(2 * n + 1);
        contour.push(0u32);
        while self.step().is_some() {
            contour.push(self.frames.len() as u32);
        }
        ContourTrace {
            n,
            contour,
            edges: self.edges,
            degree_log: self.log,
        }
    }
}

/// Output of a full exploration.
#[derive(Clone, Debug)]
pub struct ContourTrace {
    pub n: usize,
    /// `X_0, ..., X_{2N}` with `X_0 = 0`.
    pub contour: Vec<u32>,
    /// Realized multigraph, loops as `(v, v)`.
    pub edges: Vec<(u32, u32)>,
    pub degree_log: DegreeLog,
}

/// Sleeping-degree histogram recorded at the first step where at least a
/// fraction `alpha` of the vertices has been explored.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InducedHistogram {
    pub alpha: f64,
    pub step: usize,
    pub counts: Vec<u64>,
}

impl ContourTrace {
    /// Steps `n > 0` with `X_n = 0`; each closes one component's excursion.
    pub fn component_boundaries(&self) -> Vec<usize> {
        (1..self.contour.len())
            .filter(|&n| self.contour[n] == 0)
            .collect()
    }

    /// Component sizes in exploration order.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut prev = 0;
        self.component_boundaries()
            .into_iter()
            .map(|b| {
                let size = (b - prev) / 2;
                prev = b;
                size
            })
            .collect()
    }

    /// Largest and second-largest component sizes.
    pub fn largest_components(&self) -> (usize, usize) {
        let mut sizes = self.component_sizes();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        (
            sizes.first().copied().unwrap_or(0),
            sizes.get(1).copied().unwrap_or(0),
        )
    }

    pub fn max_height(&self) -> u32 {
        self.contour.iter().copied().max().unwrap_or(0)
    }

    /// Number of vertices explored (woken or visited) after `step` steps.
    pub fn explored_after(&self, step: usize) -> usize {
        // ups minus downs equals the height, ups plus downs equals the step
        (step + self.contour[step] as usize) / 2
    }

    /// `inf { k >= 1 : |S_k| <= (1 - alpha) N }`.
    pub fn snapshot_step(&self, alpha: f64) -> Option<usize> {
        let need = (alpha * self.n as f64).ceil().max(0.0) as usize;
        (1..self.contour.len()).find(|&k| self.explored_after(k) >= need)
    }

    /// Sleeping-degree histograms at each requested explored fraction.
    pub fn snapshots(&self, alphas: &[f64]) -> Vec<InducedHistogram> {
        let mut requests: Vec<(usize, usize)> = alphas
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| self.snapshot_step(a).map(|s| (s, i)))
            .collect();
        requests.sort_unstable();
        let steps: Vec<usize> = requests.iter().map(|r| r.0).collect();
        let hists = self.degree_log.histograms_at(&steps);
        let mut out: Vec<InducedHistogram> = requests
            .iter()
            .zip(hists)
            .map(|(&(step, i), counts)| InducedHistogram {
                alpha: alphas[i],
                step,
                counts,
            })
            .collect();
        out.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        out
    }

    /// Realized degree of each vertex (a loop counts twice).
    pub fn realized_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }
}

/// Runs the exploration on `seq` and records sleeping-degree snapshots.
pub fn explore_and_build(
    seq: &DegreeSequence,
    seed: u64,
    snapshot_alphas: &[f64],
) -> (ContourTrace, Vec<InducedHistogram>) {
    let trace = Explorer::new(seq, seed).run();
    let snaps = trace.snapshots(snapshot_alphas);
    (trace, snaps)
}

/// `max X - 1`: the deepest active list is a simple path in the graph.
pub fn longest_path_lower_bound(trace: &ContourTrace) -> u32 {
    trace.max_height().saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(d: &[u32]) -> DegreeSequence {
        DegreeSequence::new(d.to_vec()).unwrap()
    }

    #[test]
    fn single_edge() {
        for seed in 0..20 {
            let trace = Explorer::new(&seq(&[1, 1]), seed).run();
            assert_eq!(trace.edges.len(), 1);
            let (a, b) = trace.edges[0];
            assert_eq!(a.min(b), 0);
            assert_eq!(a.max(b), 1);
            assert_eq!(trace.contour, vec![0, 1, 2, 1, 0]);
            assert_eq!(trace.component_sizes(), vec![2]);
            assert_eq!(longest_path_lower_bound(&trace), 1);
        }
    }

    #[test]
    fn isolated_vertices() {
        let trace = Explorer::new(&seq(&[0, 0, 0]), 3).run();
        assert_eq!(trace.contour, vec![0, 1, 0, 1, 0, 1, 0]);
        assert!(trace.edges.is_empty());
        assert_eq!(trace.component_boundaries(), vec![2, 4, 6]);
        assert_eq!(longest_path_lower_bound(&trace), 0);
    }

    #[test]
    fn loops_stay_out_of_pending_lists() {
        let mut ex = Explorer::new(&seq(&[2]), 1);
        assert_eq!(ex.step(), Some(StepKind::Wake(0)));
        assert_eq!(ex.edges(), &[(0, 0)]);
        assert!(ex.pending_list(0).is_empty());
        assert_eq!(ex.step(), Some(StepKind::Retire(0)));
        assert_eq!(ex.step(), None);
    }

    #[test]
    fn snapshot_histograms() {
        let dist = crate::degree::DegreeDistribution::poisson(3.0).unwrap();
        let s = crate::degree::sample_degree_sequence(&dist, 2000, 4).unwrap();
        let (trace, snaps) = explore_and_build(&s, 9, &[0.0, 0.25, 0.5]);
        assert_eq!(snaps.len(), 3);
        assert_eq!(snaps[0].step, 1);
        for snap in &snaps {
            let sleeping: u64 = snap.counts.iter().sum();
            assert_eq!(sleeping as usize, 2000 - trace.explored_after(snap.step));
            assert!(trace.explored_after(snap.step) as f64 >= snap.alpha * 2000.0);
            assert!(
                trace.explored_after(snap.step - 1) as f64 >= snap.alpha * 2000.0 - 1.0
                    || snap.step == 1
            );
        }
    }

    #[test]
    fn replay_matches_live_histogram() {
        let dist = crate::degree::DegreeDistribution::geometric(0.4).unwrap();
        let s = crate::degree::sample_degree_sequence(&dist, 500, 2).unwrap();
        let mut ex = Explorer::new(&s, 5);
        let mut live = vec![ex.histogram().to_vec()];
        while ex.step().is_some() {
            live.push(ex.histogram().to_vec());
        }
        let log = ex.log.clone();
        let steps: Vec<usize> = (0..live.len()).collect();
        assert_eq!(log.histograms_at(&steps), live);
    }
}
