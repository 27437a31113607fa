//! Planted instances with known answers: grids built in block form and
//! scrambled per cell, and pairing families transported through the same
//! scramble.

use rand::Rng;
use serde::Serialize;

use crate::bidirected::{block_model, scramble, BidirectedGrid, PDWitness, PairingEntry, PairingFamily, PairingKind, SESWitness};
use crate::exactla::{kron, Field, Matrix};
use crate::random;

/// Ground truth of a planted grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridTruth {
    pub v_dims: Vec<usize>,
    pub w_dims: Vec<usize>,
    pub v_maps: Vec<Matrix>,
    pub w_maps: Vec<Matrix>,
}

#[derive(Debug, Clone)]
pub struct PlantedGrid {
    pub grid: BidirectedGrid,
    pub witness: SESWitness,
    pub truth: GridTruth,
    /// Per-cell change of coordinates applied to the block model.
    pub scramble: Vec<Vec<Matrix>>,
}

/// Which structure maps of the planted systems are forced to be identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Free,
    ConstantW,
    ConstantV,
    Constant,
}

fn planted_with<R: Rng + ?Sized>(rng: &mut R, field: Field, m: usize, n: usize, max_cell: usize, shape: Shape) -> PlantedGrid {
    let half = max_cell / 2;
    let const_v = matches!(shape, Shape::ConstantV | Shape::Constant);
    let const_w = matches!(shape, Shape::ConstantW | Shape::Constant);
    let v_dims: Vec<usize> = if const_v {
        vec![rng.gen_range(0..=half); n]
    } else {
        (0..n).map(|_| rng.gen_range(0..=half)).collect()
    };
    let w_dims: Vec<usize> = if const_w {
        vec![rng.gen_range(0..=max_cell - half); m]
    } else {
        (0..m).map(|_| rng.gen_range(0..=max_cell - half)).collect()
    };
    let v_maps: Vec<Matrix> = (0..n - 1)
        .map(|c| {
            if const_v {
                Matrix::identity(field, v_dims[c])
            } else {
                random::matrix(rng, field, v_dims[c + 1], v_dims[c])
            }
        })
        .collect();
    let w_maps: Vec<Matrix> = (0..m - 1)
        .map(|r| {
            if const_w {
                Matrix::identity(field, w_dims[r])
            } else {
                random::matrix(rng, field, w_dims[r], w_dims[r + 1])
            }
        })
        .collect();
    let (g, w) = block_model(field, &v_dims, &v_maps, &w_dims, &w_maps);
    let s: Vec<Vec<Matrix>> = (0..m).map(|r| (0..n).map(|c| random::invertible(rng, field, g.dims[r][c])).collect()).collect();
    let (grid, witness) = scramble(&g, &w, &s).expect("invertible scramble of a valid grid");
    PlantedGrid {
        grid,
        witness,
        truth: GridTruth {
            v_dims,
            w_dims,
            v_maps,
            w_maps,
        },
        scramble: s,
    }
}

/// Random planted grid with `m x n` cells of dimension at most `max_cell`.
pub fn planted_grid<R: Rng + ?Sized>(rng: &mut R, field: Field, m: usize, n: usize, max_cell: usize) -> PlantedGrid {
    planted_with(rng, field, m, n, max_cell, Shape::Free)
}

/// Planted grid with random shape: `m, n <= max_side`.
pub fn random_planted_grid<R: Rng + ?Sized>(rng: &mut R, field: Field, max_side: usize, max_cell: usize) -> PlantedGrid {
    let m = rng.gen_range(1..=max_side);
    let n = rng.gen_range(1..=max_side);
    planted_grid(rng, field, m, n, max_cell)
}

fn conj_product(s_out: &Matrix, block: &Matrix, s_in: &Matrix) -> Matrix {
    let inv = s_in.inverse().expect("scramble is invertible");
    s_out.mul(block).unwrap().mul(&kron(&inv, &inv).unwrap()).unwrap()
}

fn conj_coproduct(s_out: &Matrix, block: &Matrix, s_in: &Matrix) -> Matrix {
    let inv = s_in.inverse().expect("scramble is invertible");
    kron(s_out, s_out).unwrap().mul(block).unwrap().mul(&inv).unwrap()
}

/// Map `V ⊕ W` squared to `V ⊕ W` whose only nonzero blocks are
/// `W ⊗ W -> W` (`nu`) and `W ⊗ W -> V` (`beta`).
fn product_block(field: Field, v: usize, w: usize, nu: &Matrix, beta: &Matrix) -> Matrix {
    let d = v + w;
    let mut out = Matrix::zeros(field, d, d * d);
    for i in 0..w {
        for j in 0..w {
            let col = (v + i) * d + (v + j);
            for k in 0..w {
                out.set(v + k, col, nu.get(k, i * w + j));
            }
            for k in 0..v {
                out.set(k, col, beta.get(k, i * w + j));
            }
        }
    }
    out
}

/// Map `V ⊕ W -> (V ⊕ W)⊗(V ⊕ W)` whose only nonzero blocks are
/// `V -> V ⊗ V` (`nu`) and `W -> V ⊗ V` (`delta`).
fn coproduct_block(field: Field, v: usize, w: usize, nu: &Matrix, delta: &Matrix) -> Matrix {
    let d = v + w;
    let mut out = Matrix::zeros(field, d * d, d);
    for i in 0..v {
        for j in 0..v {
            let row = i * d + j;
            for k in 0..v {
                out.set(row, k, nu.get(i * v + j, k));
            }
            for k in 0..w {
                out.set(row, v + k, delta.get(i * v + j, k));
            }
        }
    }
    out
}

/// A planted grid with a natural product family: each cell maps to itself,
/// `W` is constant and the product is `nu` on `W ⊗ W -> W` plus a part
/// `W ⊗ W -> V_c` pushed along the `V` system. `V` is an ideal, so the
/// recovered `W`-block must equal `nu` at every row.
pub struct PlantedProduct {
    pub planted: PlantedGrid,
    pub family: PairingFamily,
    pub nu: Matrix,
}

pub fn planted_product<R: Rng + ?Sized>(rng: &mut R, field: Field, m: usize, n: usize, max_cell: usize) -> PlantedProduct {
    let planted = planted_with(rng, field, m, n, max_cell, Shape::ConstantW);
    let (v, w) = (&planted.truth.v_dims, planted.truth.w_dims[0]);
    let nu = random::matrix(rng, field, w, w * w);
    let mut beta = vec![random::matrix(rng, field, v[0], w * w)];
    for c in 0..n - 1 {
        let next = planted.truth.v_maps[c].mul(&beta[c]).unwrap();
        beta.push(next);
    }
    let mut entries = Vec::new();
    for r in 0..m {
        for c in 0..n {
            let blk = product_block(field, v[c], w, &nu, &beta[c]);
            let s = &planted.scramble[r][c];
            entries.push(PairingEntry {
                source: (r, c),
                target: (r, c),
                matrix: conj_product(s, &blk, s),
            });
        }
    }
    PlantedProduct {
        planted,
        family: PairingFamily {
            kind: PairingKind::Product,
            entries,
        },
        nu,
    }
}

/// Coproduct analogue: `V` constant, `nu: V -> V ⊗ V` plus a part
/// `W_r -> V ⊗ V` pulled back along the `W` system. `V` is a
/// subcoalgebra, so the recovered `V`-block equals `nu` at every column.
pub struct PlantedCoproduct {
    pub planted: PlantedGrid,
    pub family: PairingFamily,
    pub nu: Matrix,
}

pub fn planted_coproduct<R: Rng + ?Sized>(rng: &mut R, field: Field, m: usize, n: usize, max_cell: usize) -> PlantedCoproduct {
    let planted = planted_with(rng, field, m, n, max_cell, Shape::ConstantV);
    let (v, w) = (planted.truth.v_dims[0], &planted.truth.w_dims);
    let nu = random::matrix(rng, field, v * v, v);
    let mut delta = vec![random::matrix(rng, field, v * v, w[0])];
    for r in 0..m - 1 {
        let next = delta[r].mul(&planted.truth.w_maps[r]).unwrap();
        delta.push(next);
    }
    let mut entries = Vec::new();
    for r in 0..m {
        for c in 0..n {
            let blk = coproduct_block(field, v, w[r], &nu, &delta[r]);
            let s = &planted.scramble[r][c];
            entries.push(PairingEntry {
                source: (r, c),
                target: (r, c),
                matrix: conj_coproduct(s, &blk, s),
            });
        }
    }
    PlantedCoproduct {
        planted,
        family: PairingFamily {
            kind: PairingKind::Coproduct,
            entries,
        },
        nu,
    }
}

/// Product, coproduct and duality on a grid with identity structure maps
/// (before scrambling), related by `λ^∨ = f μ (g ⊗ g)` at every cell.
pub struct PlantedPD {
    pub planted: PlantedGrid,
    pub mu: PairingFamily,
    pub lambda: PairingFamily,
    pub pd: PDWitness,
}

pub fn planted_pd<R: Rng + ?Sized>(rng: &mut R, field: Field, m: usize, n: usize, max_cell: usize) -> PlantedPD {
    let planted = planted_with(rng, field, m, n, max_cell, Shape::Constant);
    let d = planted.grid.dims[0][0];
    let mu0 = random::matrix(rng, field, d, d * d);
    let p0 = random::invertible(rng, field, d);
    let q0 = p0.inverse().unwrap();
    let lam0 = p0.mul(&mu0).unwrap().mul(&kron(&q0, &q0).unwrap()).unwrap().transpose();
    let mut mu = Vec::new();
    let mut lambda = Vec::new();
    let mut f = Vec::with_capacity(m);
    let mut g = Vec::with_capacity(m);
    for r in 0..m {
        let (mut frow, mut grow) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for c in 0..n {
            let s = &planted.scramble[r][c];
            let si = s.inverse().unwrap();
            mu.push(PairingEntry {
                source: (r, c),
                target: (r, c),
                matrix: conj_product(s, &mu0, s),
            });
            lambda.push(PairingEntry {
                source: (r, c),
                target: (r, c),
                matrix: conj_coproduct(s, &lam0, s),
            });
            // The form p0 in scrambled coordinates: s⁻ᵀ p0 s⁻¹.
            frow.push(si.transpose().mul(&p0).unwrap().mul(&si).unwrap());
            grow.push(s.mul(&q0).unwrap().mul(&s.transpose()).unwrap());
        }
        f.push(frow);
        g.push(grow);
    }
    PlantedPD {
        planted,
        mu: PairingFamily {
            kind: PairingKind::Product,
            entries: mu,
        },
        lambda: PairingFamily {
            kind: PairingKind::Coproduct,
            entries: lambda,
        },
        pd: PDWitness { f, g },
    }
}

/// Adds a nonzero scalar to one entry of one matrix; returns the 1-based
/// source cell of the corrupted entry, or `None` if every matrix is empty.
pub fn corrupt_family<R: Rng + ?Sized>(rng: &mut R, fam: &mut PairingFamily) -> Option<(usize, usize)> {
    let candidates: Vec<usize> = (0..fam.entries.len()).filter(|&i| !fam.entries[i].matrix.entries().is_empty()).collect();
    if candidates.is_empty() {
        return None;
    }
    let e = &mut fam.entries[candidates[rng.gen_range(0..candidates.len())]];
    let field = e.matrix.field();
    let (i, j) = (rng.gen_range(0..e.matrix.rows()), rng.gen_range(0..e.matrix.cols()));
    let bump = rng.gen_range(1..field.p());
    e.matrix.set(i, j, field.add(e.matrix.get(i, j), bump));
    Some((e.source.0 + 1, e.source.1 + 1))
}
