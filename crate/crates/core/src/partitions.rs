//! Set partitions as restricted growth strings.
//!
//! A string `a` of length `n` with `a[0] = 0` and
//! `a[i] <= 1 + max(a[..i])` labels element `i` with its block. Each set
//! partition has exactly one such labelling.

/// Number of set partitions of an `n`-element set.
pub fn bell(n: usize) -> u128 {
    // Bell triangle
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("nonempty row"));
        for x in &row {
            let last = *next.last().expect("nonempty row");
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// Calls `visit(labels, blocks)` once for every set partition of `0..n`.
pub fn for_each_partition(n: usize, mut visit: impl FnMut(&[usize], usize)) {
    if n == 0 {
        visit(&[], 0);
        return;
    }
    let mut labels = vec![0; n];
    descend(&mut labels, 1, 1, &mut visit);
}

fn descend(labels: &mut [usize], i: usize, blocks: usize, visit: &mut impl FnMut(&[usize], usize)) {
    if i == labels.len() {
        visit(labels, blocks);
        return;
    }
    for c in 0..=blocks {
        labels[i] = c;
        descend(labels, i + 1, blocks.max(c + 1), visit);
    }
}
