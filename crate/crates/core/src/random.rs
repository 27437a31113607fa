//! Seeded random instances for generators, suites and tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exactla::{Field, Matrix};
use crate::spaces::{FilteredSpace, IndLCObj, IndTower, Seq, TailDescriptor, TateObj, Tower};

/// Deterministic RNG for a seed; identical across platforms.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix<R: Rng + ?Sized>(rng: &mut R, field: Field, rows: usize, cols: usize) -> Matrix {
    let entries: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(0..field.p()) as i64).collect();
    Matrix::from_entries(field, rows, cols, &entries).expect("length matches")
}

pub fn invertible<R: Rng + ?Sized>(rng: &mut R, field: Field, n: usize) -> Matrix {
    loop {
        let m = matrix(rng, field, n, n);
        if m.is_invertible() {
            return m;
        }
    }
}

/// Invertible lower-triangular matrix; preserves every coordinate tail
/// `span{e_j, ..., e_n}`.
pub fn lower_triangular<R: Rng + ?Sized>(rng: &mut R, field: Field, n: usize) -> Matrix {
    let mut m = Matrix::zeros(field, n, n);
    for i in 0..n {
        for j in 0..i {
            m.set(i, j, rng.gen_range(0..field.p()));
        }
        m.set(i, i, rng.gen_range(1..field.p()));
    }
    m
}

/// `k` independent columns in `k^n` (`k <= n`).
pub fn subspace<R: Rng + ?Sized>(rng: &mut R, field: Field, n: usize, k: usize) -> Matrix {
    assert!(k <= n);
    loop {
        let m = matrix(rng, field, n, k);
        if m.rank() == k {
            return m;
        }
    }
}

/// Random filtered space with between 1 and `max_flags` flags (the last one
/// zero), built from a random basis so flags are not coordinate-aligned.
pub fn filtered_space<R: Rng + ?Sized>(rng: &mut R, field: Field, ambient: usize, max_flags: usize) -> FilteredSpace {
    let basis = invertible(rng, field, ambient);
    let nflags = rng.gen_range(1..=max_flags.max(1));
    let mut dims = Vec::with_capacity(nflags);
    let mut cur = ambient;
    for _ in 0..nflags - 1 {
        cur = rng.gen_range(0..=cur);
        dims.push(cur);
    }
    dims.push(0);
    let flags = dims.iter().map(|&d| basis.submatrix(0, ambient, 0, d)).collect();
    FilteredSpace::new(field, ambient, flags).expect("nested by construction")
}

fn dims<R: Rng + ?Sized>(rng: &mut R, depth: usize, max_dim: usize) -> Vec<usize> {
    (0..depth).map(|_| rng.gen_range(0..=max_dim)).collect()
}

pub fn tower<R: Rng + ?Sized>(rng: &mut R, field: Field, depth: usize, max_dim: usize) -> Tower {
    let d = dims(rng, depth, max_dim);
    let t = (0..depth.saturating_sub(1)).map(|i| matrix(rng, field, d[i], d[i + 1])).collect();
    Tower::explicit(field, d, t, TailDescriptor::Unspecified).expect("shapes match")
}

pub fn indtower<R: Rng + ?Sized>(rng: &mut R, field: Field, depth: usize, max_dim: usize) -> IndTower {
    let d = dims(rng, depth, max_dim);
    let t = (0..depth.saturating_sub(1)).map(|i| matrix(rng, field, d[i + 1], d[i])).collect();
    IndTower::explicit(field, d, t, TailDescriptor::Unspecified).expect("shapes match")
}

pub fn tate<R: Rng + ?Sized>(rng: &mut R, field: Field, depth: usize, max_dim: usize) -> TateObj {
    TateObj::new(tower(rng, field, depth, max_dim), indtower(rng, field, depth, max_dim))
}

/// Finite direct sum of `1..=max_summands` random towers.
pub fn indlc<R: Rng + ?Sized>(rng: &mut R, field: Field, max_summands: usize, depth: usize, max_dim: usize) -> IndLCObj {
    let n = rng.gen_range(1..=max_summands);
    let summands = (0..n).map(|_| tower(rng, field, depth, max_dim)).collect();
    IndLCObj::new(field, Seq::finite(summands))
}
