//! Ladder times of the contour process.

use std::collections::VecDeque;

/// Window length `floor(N^delta)` used by the ladder-time definition.
pub fn ladder_window(n: usize, delta: f64) -> usize {
    (n as f64).powf(delta).floor() as usize
}

/// `T_0 = 0` and `T_{k+1}` the first `i > T_k` with `X_i = k + 1` and
/// `X_j >= k + 1` for every `j` in `[i, i + window]`. Windows running past
/// the end of the trace are cut at the last index. Stops at the first `k`
/// for which no such `i` exists.
pub fn ladder_times(contour: &[u32], window: usize) -> Vec<usize> {
    let min_ahead = forward_window_min(contour, window);
    let mut times = vec![0usize];
    let mut i = 1;
    loop {
        let level = times.len() as u32;
        while i < contour.len() && !(contour[i] == level && min_ahead[i] >= level) {
            i += 1;
        }
        if i >= contour.len() {
            return times;
        }
        times.push(i);
        i += 1;
    }
}

/// `out[i] = min(values[i..=min(i + window, len - 1)])` via a monotone deque.
fn forward_window_min(values: &[u32], window: usize) -> Vec<u32> {
    let len = values.len();
    let mut out = vec![0u32; len];
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..len {
        let hi = (i + window).min(len - 1);
        while next <= hi {
            while deque.back().is_some_and(|&b| values[b] >= values[next]) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        while deque.front().is_some_and(|&f| f < i) {
            deque.pop_front();
        }
        out[i] = values[*deque.front().expect("window is non-empty")];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct transcription of the definition.
    fn ladder_oracle(contour: &[u32], window: usize) -> Vec<usize> {
        let mut times = vec![0];
        loop {
            let k = times.len() as u32;
            let prev = *times.last().unwrap();
            let found = (prev + 1..contour.len()).find(|&i| {
                let hi = (i + window).min(contour.len() - 1);
                contour[i] == k && (i..=hi).all(|j| contour[j] >= k)
            });
            match found {
                Some(i) => times.push(i),
                None => return times,
            }
        }
    }

    #[test]
    fn isolated_spikes_have_no_ladder() {
        assert_eq!(ladder_times(&[0, 1, 0, 1, 0, 1, 0], 1), vec![0]);
    }

    #[test]
    fn monotone_rise() {
        // rise to 6 then fall back; window 2
        let contour: Vec<u32> = (0..=6).chain((0..6).rev()).collect();
        let times = ladder_times(&contour, 2);
        assert_eq!(times, ladder_oracle(&contour, 2));
        // early levels are reached on the rise
        assert_eq!(&times[..6], &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn window_truncated_at_trace_end() {
        let contour = [0, 1, 2, 1];
        assert_eq!(ladder_times(&contour, 10), vec![0, 1]);
        assert_eq!(ladder_times(&contour, 10), ladder_oracle(&contour, 10));
    }

    #[test]
    fn window_helper() {
        assert_eq!(ladder_window(10_000, 0.3), 15);
        assert_eq!(ladder_window(100_000, 0.08), 2);
    }

    fn walk() -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(any::<bool>(), 0..200).prop_map(|ups| {
            let mut x = 0u32;
            let mut c = vec![0];
            for up in ups {
                x = if up || x == 0 { x + 1 } else { x - 1 };
                c.push(x);
            }
            c
        })
    }

    proptest! {
        #[test]
        fn matches_definition(contour in walk(), window in 0usize..12) {
            let times = ladder_times(&contour, window);
            prop_assert_eq!(&times, &ladder_oracle(&contour, window));
            prop_assert!(times.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
