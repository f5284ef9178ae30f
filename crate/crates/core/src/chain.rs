//! Exact solver for the chain-constrained linear program
//!
//! ```text
//! maximize   sum_j c_j w_j
//! subject to -1 <= w_j <= 1,   |w_{j+1} - w_j| <= gap_j
//! ```
//!
//! by dynamic programming over concave piecewise-linear value functions.
//! The stage value `V_j(w)` is the best objective over `w_1..w_j` with
//! `w_j = w`. Passing to the next stage takes a sliding-window maximum of
//! radius `gap_j`, which for a concave function splits the graph at its peak
//! and inserts a flat segment of length `2 gap_j`, then adds `c_{j+1} w`.

/// Concave piecewise-linear function on `[-1, 1]` stored by its vertices.
#[derive(Debug, Clone)]
struct ConcavePwl {
    pts: Vec<(f64, f64)>,
}

impl ConcavePwl {
    fn linear(c: f64) -> Self {
        Self {
            pts: vec![(-1.0, -c), (1.0, c)],
        }
    }

    fn peak(&self) -> (usize, f64, f64) {
        let mut best = 0;
        for (i, p) in self.pts.iter().enumerate() {
            if p.1 > self.pts[best].1 {
                best = i;
            }
        }
        (best, self.pts[best].0, self.pts[best].1)
    }

    fn add_linear(&mut self, c: f64) {
        for p in &mut self.pts {
            p.1 += c * p.0;
        }
    }

    /// `w -> max { V(u) : |u - w| <= r, u in [-1, 1] }` restricted to `[-1, 1]`.
    fn window_max(&self, r: f64) -> Self {
        let (k, _, _) = self.peak();
        let mut shifted: Vec<(f64, f64)> = Vec::with_capacity(self.pts.len() + 1);
        shifted.extend(self.pts[..=k].iter().map(|&(x, y)| (x - r, y)));
        shifted.extend(self.pts[k..].iter().map(|&(x, y)| (x + r, y)));
        Self {
            pts: clip(&shifted),
        }
    }
}

fn interpolate(a: (f64, f64), b: (f64, f64), x: f64) -> f64 {
    if b.0 <= a.0 {
        return a.1.max(b.1);
    }
    let t = (x - a.0) / (b.0 - a.0);
    a.1 + t * (b.1 - a.1)
}

/// Restricts a piecewise-linear graph to `[-1, 1]`, dropping coincident vertices.
fn clip(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    let push = |out: &mut Vec<(f64, f64)>, p: (f64, f64)| match out.last_mut() {
        Some(last) if p.0 - last.0 <= 1e-15 => last.1 = last.1.max(p.1),
        _ => out.push(p),
    };
    // the shifted graph always covers [-1 - r, 1 + r] ⊇ [-1, 1]
    let first = pts.partition_point(|p| p.0 <= -1.0);
    let left = if first == 0 {
        pts[0].1
    } else if first == pts.len() {
        pts[first - 1].1
    } else {
        interpolate(pts[first - 1], pts[first], -1.0)
    };
    push(&mut out, (-1.0, left));
    for &p in &pts[first..] {
        if p.0 >= 1.0 {
            break;
        }
        push(&mut out, p);
    }
    let last = pts.partition_point(|p| p.0 < 1.0);
    let right = if last == 0 {
        pts[0].1
    } else if last == pts.len() {
        pts[last - 1].1
    } else {
        interpolate(pts[last - 1], pts[last], 1.0)
    };
    push(&mut out, (1.0, right));
    if out.len() == 1 {
        out.push((1.0, right));
    }
    out
}

/// Optimum of the chain LP and one maximizing weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution {
    pub value: f64,
    pub weights: Vec<f64>,
}

/// Solves the chain LP for coefficients `c` and `gaps.len() == c.len() - 1`.
pub fn solve(c: &[f64], gaps: &[f64]) -> ChainSolution {
    if c.is_empty() {
        return ChainSolution {
            value: 0.0,
            weights: Vec::new(),
        };
    }
    assert_eq!(gaps.len() + 1, c.len(), "one gap between consecutive values");
    let mut peaks = Vec::with_capacity(c.len());
    let mut stage = ConcavePwl::linear(c[0]);
    for (j, &gap) in gaps.iter().enumerate() {
        peaks.push(stage.peak().1);
        stage = stage.window_max(gap.max(0.0));
        stage.add_linear(c[j + 1]);
    }
    let (_, x_last, value) = stage.peak();
    let mut weights = vec![0.0; c.len()];
    weights[c.len() - 1] = x_last;
    for j in (0..gaps.len()).rev() {
        let next = weights[j + 1];
        let lo = (next - gaps[j]).max(-1.0);
        let hi = (next + gaps[j]).min(1.0);
        weights[j] = peaks[j].clamp(lo, hi);
    }
    ChainSolution { value, weights }
}
