//! Completed tensor products of towers, ind-linearly-compact and
//! pro-discrete objects, the Hom presentation, and their duality checks.
//!
//! Doubly indexed limits and colimits are replaced by diagonal cofinal
//! subsystems: level `n` of a tensor of systems is `A_n ⊗ B_n`, and families
//! indexed by pairs are flattened with [`PairIndexing`]. Tensors of level
//! spaces use [`kron`] with the left factor major, so `e_i ⊗ f_j` has index
//! `i * dim B + j`.

use serde::Serialize;
use thiserror::Error;

use crate::exactla::{kron, Field, LinAlgError, Matrix};
use crate::spaces::{
    IndLCObj, IndTower, Presentation, ProDiscObj, Seq, SpaceError, Stage, TailDescriptor, TateObj, Tower,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("field mismatch: GF({left}) vs GF({right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("evaluation map check failed at factor {factor}, level {level}: {detail}")]
    Evaluation { factor: usize, level: usize, detail: String },
    #[error("duality sides differ at piece {piece}, level {level}: {detail}")]
    DualityMismatch { piece: usize, level: usize, detail: String },
}

impl From<LinAlgError> for TensorError {
    fn from(e: LinAlgError) -> Self {
        Self::Space(SpaceError::LinAlg(e))
    }
}

pub type Result<T> = std::result::Result<T, TensorError>;

fn same_field(a: Field, b: Field) -> Result<()> {
    if a != b {
        return Err(TensorError::FieldMismatch {
            left: a.p(),
            right: b.p(),
        });
    }
    Ok(())
}

/// Diagonal enumeration of `ℕ × ℕ`: `(0,0), (0,1), (1,0), (0,2), (1,1), ...`
/// (0-based), optionally restricted to `i < rows`, `j < cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndexing {
    rows: Option<usize>,
    cols: Option<usize>,
}

impl PairIndexing {
    pub const FULL: PairIndexing = PairIndexing { rows: None, cols: None };

    pub fn restricted(rows: Option<usize>, cols: Option<usize>) -> Self {
        Self { rows, cols }
    }

    /// Number of pairs, `None` when infinite.
    pub fn len(&self) -> Option<usize> {
        match (self.rows, self.cols) {
            (Some(0), _) | (_, Some(0)) => Some(0),
            (Some(r), Some(c)) => Some(r * c),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// The `k`-th pair, or `None` past the end.
    pub fn pair(&self, k: usize) -> Option<(usize, usize)> {
        if self.len().is_some_and(|n| k >= n) {
            return None;
        }
        let mut remaining = k;
        let mut s = 0usize;
        loop {
            // Valid i on diagonal s: max(0, s - cols + 1) ..= min(s, rows - 1).
            let lo = self.cols.map_or(0, |c| (s + 1).saturating_sub(c));
            let hi = self.rows.map_or(s, |r| s.min(r - 1));
            if lo <= hi {
                let count = hi - lo + 1;
                if remaining < count {
                    let i = lo + remaining;
                    return Some((i, s - i));
                }
                remaining -= count;
            }
            s += 1;
        }
    }

    /// Position of `(i, j)` in the enumeration.
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        if self.rows.is_some_and(|r| i >= r) || self.cols.is_some_and(|c| j >= c) {
            return None;
        }
        let s = i + j;
        let mut k = 0;
        for d in 0..s {
            let lo = self.cols.map_or(0, |c| (d + 1).saturating_sub(c));
            let hi = self.rows.map_or(d, |r| d.min(r - 1));
            if lo <= hi {
                k += hi - lo + 1;
            }
        }
        let lo = self.cols.map_or(0, |c| (s + 1).saturating_sub(c));
        Some(k + i - lo)
    }

    /// Checks that the first `n` pairs are distinct and that `index` inverts
    /// `pair` on them.
    pub fn check_prefix(&self, n: usize) -> bool {
        let mut seen = std::collections::HashSet::new();
        let n = self.len().map_or(n, |l| n.min(l));
        (0..n).all(|k| match self.pair(k) {
            Some((i, j)) => seen.insert((i, j)) && self.index(i, j) == Some(k),
            None => false,
        })
    }
}

fn combined_tail(a: TailDescriptor, b: TailDescriptor) -> TailDescriptor {
    if a == TailDescriptor::Stabilizing && b == TailDescriptor::Stabilizing {
        TailDescriptor::Stabilizing
    } else {
        TailDescriptor::Unspecified
    }
}

fn combined_extent(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn kron_stage(a: Stage, b: Stage) -> std::result::Result<Stage, SpaceError> {
    let link = match (a.link, b.link) {
        (Some(x), Some(y)) => Some(kron(&x, &y)?),
        _ => None,
    };
    Ok(Stage {
        dim: a.dim * b.dim,
        link,
    })
}

macro_rules! tensor_systems {
    ($name:ident, $ty:ident) => {
        pub fn $name(a: &$ty, b: &$ty) -> Result<$ty> {
            same_field(a.field(), b.field())?;
            let (x, y) = (a.clone(), b.clone());
            let out = $ty::from_fn(
                a.field(),
                combined_tail(a.tail(), b.tail()),
                combined_extent(a.extent(), b.extent()),
                move |i| kron_stage(x.level(i)?, y.level(i)?),
            );
            Ok(match (a.stable_from(), b.stable_from()) {
                (Some(s), Some(t)) if a.extent().is_none() && b.extent().is_none() => out.stable_from_level(s.max(t)),
                _ => out,
            })
        }
    };
}

tensor_systems!(tensor_star_towers, Tower);
tensor_systems!(tensor_indtowers, IndTower);

/// Pairs `(i, j)` of a product family, flattened diagonally.
fn pair_family<T, U>(a: &Seq<T>, b: &Seq<T>, f: impl Fn(&T, &T) -> Result<U> + Send + Sync + 'static) -> Seq<U>
where
    T: Clone + Send + Sync + 'static,
    U: Clone + Send + Sync + 'static,
{
    let idx = PairIndexing::restricted(a.len(), b.len());
    let (a, b) = (a.clone(), b.clone());
    Seq::lazy(idx.len(), move |k| {
        let (i, j) = idx.pair(k).expect("k within length");
        f(&a.get(i)?, &b.get(j)?).map_err(|e| match e {
            TensorError::Space(s) => s,
            TensorError::FieldMismatch { left, right } => LinAlgError::FieldMismatch { left, right }.into(),
            other => unreachable!("system tensor cannot fail with {other}"),
        })
    })
}

pub fn tensor_star_indlc(a: &IndLCObj, b: &IndLCObj) -> Result<IndLCObj> {
    same_field(a.field, b.field)?;
    Ok(IndLCObj::new(a.field, pair_family(&a.summands, &b.summands, tensor_star_towers)))
}

pub fn tensor_bang_prodisc(a: &ProDiscObj, b: &ProDiscObj) -> Result<ProDiscObj> {
    same_field(a.field, b.field)?;
    Ok(ProDiscObj::new(a.field, pair_family(&a.factors, &b.factors, tensor_indtowers)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedTarget {
    IndLC,
    ProDisc,
}

#[derive(Debug, Clone)]
pub enum Embedded {
    IndLC(IndLCObj),
    ProDisc(ProDiscObj),
}

/// Dimension of the new part added at level `i`: all of level 0, then the
/// cokernel of each inclusion (direct) or kernel of each projection
/// (inverse).
fn increment_dim(dim: usize, link: Option<&Matrix>) -> usize {
    match link {
        None => dim,
        Some(m) => dim - m.rank(),
    }
}

/// Finite-dimensional increments of a system as constant systems. When the
/// system is known to be determined by a finite prefix, zero increments are
/// dropped and the result is finite; otherwise increment `i` sits at
/// position `i`.
fn increments<T>(
    depth: Option<usize>,
    level: impl Fn(usize) -> std::result::Result<Stage, SpaceError> + Send + Sync + 'static,
    constant: impl Fn(usize) -> T + Send + Sync + 'static,
) -> Result<Seq<T>>
where
    T: Clone + Send + Sync + 'static,
{
    match depth {
        Some(d) => {
            let mut out = Vec::new();
            for i in 0..d {
                let s = level(i)?;
                let inc = increment_dim(s.dim, s.link.as_ref());
                if inc > 0 {
                    out.push(constant(inc));
                }
            }
            Ok(Seq::finite(out))
        }
        None => Ok(Seq::lazy(None, move |i| {
            let s = level(i)?;
            Ok(constant(increment_dim(s.dim, s.link.as_ref())))
        })),
    }
}

fn prepend<T: Clone + Send + Sync + 'static>(head: Option<T>, rest: Seq<T>) -> Seq<T> {
    match head {
        None => rest,
        Some(h) => match rest.len() {
            Some(n) => {
                let mut v = vec![h];
                v.extend(rest.take(n).expect("finite sequence"));
                Seq::finite(v)
            }
            None => Seq::lazy(None, move |i| if i == 0 { Ok(h.clone()) } else { rest.get(i - 1) }),
        },
    }
}

/// Presents a Tate space as a direct sum of linearly compact pieces (the
/// c-lattice plus the finite steps of the d-lattice) or as a product of
/// discrete pieces (the d-lattice plus the finite steps of the c-lattice).
///
/// Increments are read off the given transitions; they are exact when the
/// d-lattice transitions are injective and the c-lattice ones surjective.
pub fn embed_tate(v: &TateObj, target: EmbedTarget) -> Result<Embedded> {
    let field = v.field();
    match target {
        EmbedTarget::IndLC => {
            let d = v.d_lattice.clone();
            let steps = increments::<Tower>(
                v.d_lattice.determining_depth(),
                move |i| d.level(i),
                move |n| Tower::constant(field, n),
            )?;
            let head = (!v.c_lattice.is_known_zero()?).then(|| v.c_lattice.clone());
            Ok(Embedded::IndLC(IndLCObj::new(field, prepend(head, steps))))
        }
        EmbedTarget::ProDisc => {
            let c = v.c_lattice.clone();
            let steps = increments::<IndTower>(
                v.c_lattice.determining_depth(),
                move |i| c.level(i),
                move |n| IndTower::constant(field, n),
            )?;
            let head = (!v.d_lattice.is_known_zero()?).then(|| v.d_lattice.clone());
            Ok(Embedded::ProDisc(ProDiscObj::new(field, prepend(head, steps))))
        }
    }
}

pub fn embed_indlc(v: &TateObj) -> Result<IndLCObj> {
    match embed_tate(v, EmbedTarget::IndLC)? {
        Embedded::IndLC(x) => Ok(x),
        Embedded::ProDisc(_) => unreachable!(),
    }
}

pub fn embed_prodisc(v: &TateObj) -> Result<ProDiscObj> {
    match embed_tate(v, EmbedTarget::ProDisc)? {
        Embedded::ProDisc(x) => Ok(x),
        Embedded::IndLC(_) => unreachable!(),
    }
}

/// `A ⊗̂* B` of Tate spaces. The result is tagged ind-linearly-compact: it
/// need not be Tate.
pub fn tensor_star_tate(a: &TateObj, b: &TateObj) -> Result<IndLCObj> {
    tensor_star_indlc(&embed_indlc(a)?, &embed_indlc(b)?)
}

/// `A ⊗̂! B` of Tate spaces, tagged pro-discrete.
pub fn tensor_bang_tate(a: &TateObj, b: &TateObj) -> Result<ProDiscObj> {
    tensor_bang_prodisc(&embed_prodisc(a)?, &embed_prodisc(b)?)
}

/// Evaluation `X* ⊗ Y -> Hom(X, Y)`, `φ ⊗ y ↦ (x ↦ φ(x) y)`, on level
/// spaces of dimensions `x`, `y`. Hom matrices (`y × x`) are vectorized row
/// by row. The result is a permutation matrix.
pub fn ev_matrix(field: Field, x: usize, y: usize) -> Matrix {
    let mut m = Matrix::zeros(field, x * y, x * y);
    for i in 0..x {
        for j in 0..y {
            m.set(j * x + i, i * y + j, 1);
        }
    }
    m
}

fn vectorize(m: &Matrix) -> Matrix {
    Matrix::from_entries(
        m.field(),
        m.rows() * m.cols(),
        1,
        &m.entries().iter().map(|&e| e as i64).collect::<Vec<_>>(),
    )
    .expect("length matches")
}

/// Evaluation data for one factor of the Hom presentation.
#[derive(Debug, Clone, Serialize)]
pub struct EvFactor {
    /// Position in the pro-discrete family.
    pub factor: usize,
    /// Positions of the contributing factors of `A*` and `B`.
    pub pair: (usize, usize),
    /// `Ev` at each materialized level.
    pub ev: Vec<Matrix>,
}

#[derive(Debug, Clone)]
pub struct HomPresentation {
    pub hom: ProDiscObj,
    pub evaluation: Vec<EvFactor>,
}

/// `Hom(A, B) ≅ A* ⊗̂! B`, with evaluation matrices for the first `depth`
/// factors at `depth` levels. Each `Ev` is verified on every rank-one
/// basis tensor, checked injective, and checked to intertwine the factor
/// transitions with `h ↦ i ∘ h ∘ p`.
pub fn hom_via_tensor(a: &TateObj, b: &TateObj, depth: usize) -> Result<HomPresentation> {
    same_field(a.field(), b.field())?;
    let field = a.field();
    let left = embed_prodisc(&a.dual())?;
    let right = embed_prodisc(b)?;
    let hom = tensor_bang_prodisc(&left, &right)?;
    let idx = PairIndexing::restricted(left.factors.len(), right.factors.len());
    let count = idx.len().map_or(depth, |n| n.min(depth));
    let mut evaluation = Vec::with_capacity(count);
    for k in 0..count {
        let (i, j) = idx.pair(k).expect("within length");
        let xs = left.factors.get(i)?;
        let ys = right.factors.get(j)?;
        let levels = combined_extent(xs.extent(), ys.extent()).map_or(depth, |e| e.min(depth));
        if levels == 0 {
            continue;
        }
        let px = xs.materialize(levels)?;
        let py = ys.materialize(levels)?;
        let mut evs = Vec::with_capacity(levels);
        for n in 0..levels {
            let (x, y) = (px.dims[n], py.dims[n]);
            let ev = ev_matrix(field, x, y);
            for s in 0..x {
                for t in 0..y {
                    let phi = Matrix::unit(field, x, s);
                    let yv = Matrix::unit(field, y, t);
                    let expected = vectorize(&yv.mul(&phi.transpose())?);
                    let got = ev.mul(&kron(&phi, &yv)?)?;
                    if got != expected {
                        return Err(TensorError::Evaluation {
                            factor: k,
                            level: n,
                            detail: format!("basis tensor ({s},{t})"),
                        });
                    }
                }
            }
            if ev.rank() != x * y {
                return Err(TensorError::Evaluation {
                    factor: k,
                    level: n,
                    detail: "not injective".into(),
                });
            }
            if n > 0 {
                // X* = dual of X with transitions pᵀ; Hom transition h ↦ i h p.
                let pt = &px.transitions[n - 1];
                let inc = &py.transitions[n - 1];
                let lhs = ev.mul(&kron(pt, inc)?)?;
                let rhs = kron(inc, pt)?.mul(&evs[n - 1])?;
                if lhs != rhs {
                    return Err(TensorError::Evaluation {
                        factor: k,
                        level: n,
                        detail: "does not intertwine transitions".into(),
                    });
                }
            }
            evs.push(ev);
        }
        evaluation.push(EvFactor {
            factor: k,
            pair: (i, j),
            ev: evs,
        });
    }
    Ok(HomPresentation { hom, evaluation })
}

/// Alignment witness for `(A ⊗̂* B)* = A* ⊗̂! B*`.
#[derive(Debug, Clone, Serialize)]
pub struct TensorDualityWitness {
    /// `(i, j)` for each compared piece.
    pub alignment: Vec<(usize, usize)>,
    /// Level dimensions of each compared piece.
    pub dims: Vec<Vec<usize>>,
}

fn compare_pieces(lhs: &[Presentation], rhs: &[Presentation]) -> Result<()> {
    if lhs.len() != rhs.len() {
        return Err(TensorError::DualityMismatch {
            piece: lhs.len().min(rhs.len()),
            level: 0,
            detail: format!("{} pieces vs {}", lhs.len(), rhs.len()),
        });
    }
    for (k, (l, r)) in lhs.iter().zip(rhs).enumerate() {
        if let Some(n) = (0..l.dims.len().max(r.dims.len())).find(|&n| l.dims.get(n) != r.dims.get(n)) {
            return Err(TensorError::DualityMismatch {
                piece: k,
                level: n,
                detail: format!("dimension {:?} vs {:?}", l.dims.get(n), r.dims.get(n)),
            });
        }
        if let Some(n) = (0..l.transitions.len()).find(|&n| l.transitions[n] != r.transitions[n]) {
            return Err(TensorError::DualityMismatch {
                piece: k,
                level: n + 1,
                detail: "transition matrices differ".into(),
            });
        }
    }
    Ok(())
}

/// Materializes both `dual(A ⊗̂* B)` and `dual(A) ⊗̂! dual(B)` to `depth`
/// pieces of `depth` levels and checks they agree exactly.
pub fn check_tensor_duality(a: &IndLCObj, b: &IndLCObj, depth: usize) -> Result<TensorDualityWitness> {
    let lhs = tensor_star_indlc(a, b)?.dual();
    let rhs = tensor_bang_prodisc(&a.dual(), &b.dual())?;
    let l = lhs.materialize(depth, depth)?;
    let r = rhs.materialize(depth, depth)?;
    compare_pieces(&l, &r)?;
    let idx = PairIndexing::restricted(a.summands.len(), b.summands.len());
    Ok(TensorDualityWitness {
        alignment: (0..l.len()).map(|k| idx.pair(k).expect("within length")).collect(),
        dims: l.iter().map(|p| p.dims.clone()).collect(),
    })
}

/// Permutation `P` with `P (x ⊗ y) = y ⊗ x` for `x ∈ k^m`, `y ∈ k^n`.
pub fn swap_permutation(field: Field, m: usize, n: usize) -> Matrix {
    let mut p = Matrix::zeros(field, m * n, m * n);
    for i in 0..m {
        for j in 0..n {
            p.set(j * m + i, i * n + j, 1);
        }
    }
    p
}

/// Permutation from `(x ⊗ y) ⊗ z` to `x ⊗ (y ⊗ z)` coordinates. With the
/// left-major convention both orders coincide, so this is the identity; it
/// is computed from the index formulas rather than assumed.
pub fn associator_permutation(field: Field, a: usize, b: usize, c: usize) -> Matrix {
    let n = a * b * c;
    let mut p = Matrix::zeros(field, n, n);
    for i in 0..a {
        for j in 0..b {
            for k in 0..c {
                let left = (i * b + j) * c + k;
                let right = i * (b * c) + (j * c + k);
                p.set(right, left, 1);
            }
        }
    }
    p
}

/// Comparison `A ⊗̂* (B ⊗̂! C) -> (A ⊗̂* B) ⊗̂! C` on matching level
/// presentations: at each level the associator, verified to intertwine the
/// transitions of both sides.
pub fn mixed_comparison(a: &Presentation, b: &Presentation, c: &Presentation) -> Result<Vec<Matrix>> {
    let depth = a.depth().min(b.depth()).min(c.depth());
    let field = a.field;
    let maps: Vec<Matrix> = (0..depth)
        .map(|n| associator_permutation(field, a.dims[n], b.dims[n], c.dims[n]).transpose())
        .collect();
    for n in 1..depth {
        let (ta, tb, tc) = (&a.transitions[n - 1], &b.transitions[n - 1], &c.transitions[n - 1]);
        let src = kron(ta, &kron(tb, tc)?)?;
        let dst = kron(&kron(ta, tb)?, tc)?;
        let (hi, lo) = match a.direction {
            crate::spaces::Direction::Inverse => (n, n - 1),
            crate::spaces::Direction::Direct => (n - 1, n),
        };
        if maps[lo].mul(&src)? != dst.mul(&maps[hi])? {
            return Err(TensorError::DualityMismatch {
                piece: 0,
                level: n,
                detail: "comparison does not commute with transitions".into(),
            });
        }
    }
    Ok(maps)
}

/// Bilinear `A × B -> C` (a `c × ab` matrix on `A ⊗ B`) to the matrix of
/// `A -> Hom(B, C)`, Hom matrices vectorized row by row.
pub fn curry(m: &Matrix, a: usize, b: usize) -> Matrix {
    let c = m.rows();
    assert_eq!(m.cols(), a * b);
    let mut out = Matrix::zeros(m.field(), c * b, a);
    for i in 0..a {
        for j in 0..b {
            for k in 0..c {
                out.set(k * b + j, i, m.get(k, i * b + j));
            }
        }
    }
    out
}

pub fn uncurry(m: &Matrix, b: usize, c: usize) -> Matrix {
    let a = m.cols();
    assert_eq!(m.rows(), b * c);
    let mut out = Matrix::zeros(m.field(), c, a * b);
    for i in 0..a {
        for j in 0..b {
            for k in 0..c {
                out.set(k, i * b + j, m.get(k * b + j, i));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::spaces::{laurent, polynomial, power_series};
    use rand::Rng;

    fn gf(p: u32) -> Field {
        Field::new(p).unwrap()
    }

    #[test]
    fn pair_indexing_order_and_bijectivity() {
        let full = PairIndexing::FULL;
        let first: Vec<_> = (0..6).map(|k| full.pair(k).unwrap()).collect();
        assert_eq!(first, vec![(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
        assert!(full.check_prefix(10_000));
        let r = PairIndexing::restricted(Some(2), Some(2));
        let all: Vec<_> = (0..4).map(|k| r.pair(k).unwrap()).collect();
        assert_eq!(all, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(r.pair(4), None);
        assert!(PairIndexing::restricted(Some(3), None).check_prefix(500));
        assert!(PairIndexing::restricted(None, Some(1)).check_prefix(50));
        assert!(PairIndexing::restricted(Some(0), None).is_empty());
    }

    #[test]
    fn power_series_squared() {
        let f = gf(2);
        let t = tensor_star_towers(&power_series(f), &power_series(f)).unwrap();
        let p = t.materialize(5).unwrap();
        assert_eq!(p.dims, vec![1, 4, 9, 16, 25]);
        let u = tensor_star_towers(&Tower::constant(f, 1), &power_series(f)).unwrap();
        let (pu, pp) = (u.materialize(5).unwrap(), power_series(f).materialize(5).unwrap());
        assert_eq!((pu.dims, pu.transitions), (pp.dims, pp.transitions));
        let poly = tensor_indtowers(&polynomial(f), &polynomial(f)).unwrap();
        assert_eq!(poly.materialize(4).unwrap().dims, vec![1, 4, 9, 16]);
        let z = tensor_indtowers(&IndTower::zero(f), &polynomial(f)).unwrap();
        assert!(z.materialize(4).unwrap().dims.iter().all(|&d| d == 0));
    }

    #[test]
    fn indlc_summands_follow_pair_order() {
        let f = gf(3);
        let a = IndLCObj::new(f, Seq::finite(vec![power_series(f), Tower::constant(f, 2)]));
        let b = IndLCObj::new(f, Seq::finite(vec![Tower::constant(f, 3), power_series(f)]));
        let t = tensor_star_indlc(&a, &b).unwrap();
        assert_eq!(t.summands.len(), Some(4));
        let dims: Vec<usize> = t.materialize(4, 2).unwrap().iter().map(|p| p.dims[1]).collect();
        // (0,0) ps⊗3, (0,1) ps⊗ps, (1,0) 2⊗3, (1,1) 2⊗ps
        assert_eq!(dims, vec![6, 4, 6, 4]);
        let z = tensor_star_indlc(&IndLCObj::zero(f), &a).unwrap();
        assert_eq!(z.summands.len(), Some(0));
        assert!(matches!(
            tensor_star_indlc(&a, &IndLCObj::zero(gf(2))),
            Err(TensorError::FieldMismatch { .. })
        ));
    }

    #[test]
    fn embeddings_of_laurent_and_finite() {
        let f = gf(2);
        let e = embed_indlc(&laurent(f)).unwrap();
        assert_eq!(e.summands.len(), None);
        let pieces = e.materialize(4, 3).unwrap();
        assert_eq!(pieces[0].dims, vec![1, 2, 3]);
        assert!(pieces[1..].iter().all(|p| p.dims == vec![1, 1, 1]));

        let fin = embed_indlc(&TateObj::finite(f, 3)).unwrap();
        assert_eq!(fin.summands.len(), Some(1));
        let compact = TateObj::new(power_series(f), IndTower::zero(f));
        let pd = embed_prodisc(&compact).unwrap();
        let factors = pd.materialize(3, 2).unwrap();
        assert!(factors.iter().all(|p| p.dims == vec![1, 1]));

        let star = tensor_star_tate(&TateObj::finite(f, 2), &TateObj::finite(f, 3)).unwrap();
        assert_eq!(star.summands.len(), Some(1));
        assert_eq!(star.materialize(1, 2).unwrap()[0].dims, vec![6, 6]);
    }

    #[test]
    fn star_versus_bang_shapes() {
        let f = gf(2);
        let s = TateObj::new(power_series(f), IndTower::zero(f));
        let t = TateObj::new(Tower::zero(f), polynomial(f));
        // k[[s]] ⊗* k[t]: a sum of copies of k[[s]], one per power of t.
        let star = tensor_star_tate(&s, &t).unwrap();
        assert_eq!(star.summands.len(), None);
        assert!(star.materialize(4, 3).unwrap().iter().all(|p| p.dims == vec![1, 2, 3]));
        // k[[s]] ⊗! k[t]: a product of copies of k[t], one per power of s.
        let bang = tensor_bang_tate(&s, &t).unwrap();
        assert_eq!(bang.factors.len(), None);
        assert!(bang.materialize(4, 3).unwrap().iter().all(|p| p.dims == vec![1, 2, 3]));
    }

    #[test]
    fn laurent_star_first_summand() {
        let f = gf(2);
        let t = tensor_star_tate(&laurent(f), &laurent(f)).unwrap();
        assert_eq!(t.materialize(1, 4).unwrap()[0].dims, vec![1, 4, 9, 16]);
    }

    #[test]
    fn hom_of_power_series() {
        let f = gf(2);
        let ps = TateObj::new(power_series(f), IndTower::zero(f));
        let h = hom_via_tensor(&ps, &ps, 4).unwrap();
        let factors = h.hom.materialize(4, 4).unwrap();
        // Hom(k[t]/t^n, k[t]/t^m) has dimension n·m; the first m factors at
        // level n must add up to it.
        for m in 1..=4 {
            for n in 1..=4 {
                let total: usize = factors[..m].iter().map(|p| p.dims[n - 1]).sum();
                assert_eq!(total, n * m);
            }
        }
        assert_eq!(h.evaluation.len(), 4);

        let k = TateObj::finite(f, 1);
        let hk = hom_via_tensor(&k, &k, 3).unwrap();
        assert_eq!(hk.hom.factors.len(), Some(1));
        assert_eq!(hk.hom.materialize(1, 3).unwrap()[0].dims, vec![1, 1, 1]);

        let hl = hom_via_tensor(&laurent(f), &k, 3).unwrap();
        let expected = embed_prodisc(&laurent(f).dual()).unwrap().materialize(3, 3).unwrap();
        let got: Vec<Vec<usize>> = hl.hom.materialize(3, 3).unwrap().into_iter().map(|p| p.dims).collect();
        assert_eq!(got, expected.into_iter().map(|p| p.dims).collect::<Vec<_>>());
    }

    #[test]
    fn tensor_duality_examples() {
        let f = gf(2);
        let ps = IndLCObj::new(f, Seq::finite(vec![power_series(f)]));
        let w = check_tensor_duality(&ps, &ps, 4).unwrap();
        assert_eq!(w.dims, vec![vec![1, 4, 9, 16]]);
        let z = check_tensor_duality(&IndLCObj::zero(f), &ps, 4).unwrap();
        assert!(z.dims.is_empty());
        let l = embed_indlc(&laurent(f)).unwrap();
        let wl = check_tensor_duality(&l, &l, 3).unwrap();
        assert_eq!(wl.alignment, vec![(0, 0), (0, 1), (1, 0)]);
    }

    #[test]
    fn swap_and_associator_on_random_towers() {
        let f = gf(3);
        let mut rng = random::rng(5);
        for _ in 0..20 {
            let depth = rng.gen_range(2..5);
            let a = random::tower(&mut rng, f, depth, 3);
            let b = random::tower(&mut rng, f, depth, 3);
            let c = random::tower(&mut rng, f, depth, 3);
            let ab = tensor_star_towers(&a, &b).unwrap().materialize(depth).unwrap();
            let ba = tensor_star_towers(&b, &a).unwrap().materialize(depth).unwrap();
            let (pa, pb) = (a.materialize(depth).unwrap(), b.materialize(depth).unwrap());
            for n in 0..depth - 1 {
                let s_lo = swap_permutation(f, pa.dims[n], pb.dims[n]);
                let s_hi = swap_permutation(f, pa.dims[n + 1], pb.dims[n + 1]);
                assert_eq!(s_lo.mul(&ab.transitions[n]).unwrap(), ba.transitions[n].mul(&s_hi).unwrap());
            }
            let left = tensor_star_towers(&tensor_star_towers(&a, &b).unwrap(), &c).unwrap().materialize(depth).unwrap();
            let right = tensor_star_towers(&a, &tensor_star_towers(&b, &c).unwrap()).unwrap().materialize(depth).unwrap();
            let pc = c.materialize(depth).unwrap();
            for n in 0..depth - 1 {
                let lo = associator_permutation(f, pa.dims[n], pb.dims[n], pc.dims[n]);
                let hi = associator_permutation(f, pa.dims[n + 1], pb.dims[n + 1], pc.dims[n + 1]);
                assert_eq!(lo.mul(&left.transitions[n]).unwrap(), right.transitions[n].mul(&hi).unwrap());
            }
            mixed_comparison(&pa, &pb, &pc).unwrap();
        }
    }

    #[test]
    fn curry_round_trip() {
        let f = gf(5);
        let mut rng = random::rng(9);
        for _ in 0..30 {
            let (a, b, c) = (rng.gen_range(0..4), rng.gen_range(0..4), rng.gen_range(0..4));
            let m = random::matrix(&mut rng, f, c, a * b);
            let cm = curry(&m, a, b);
            assert_eq!(cm.shape(), (b * c, a));
            assert_eq!(uncurry(&cm, b, c), m);
            // curry(m)·x is the matrix of y ↦ m(x ⊗ y)
            if a > 0 && b > 0 && c > 0 {
                let x = random::matrix(&mut rng, f, a, 1);
                let y = random::matrix(&mut rng, f, b, 1);
                let hv = cm.mul(&x).unwrap();
                let h = Matrix::from_entries(f, c, b, &hv.entries().iter().map(|&e| e as i64).collect::<Vec<_>>()).unwrap();
                assert_eq!(h.mul(&y).unwrap(), m.mul(&kron(&x, &y).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn unit_laws_for_families() {
        let f = gf(2);
        let unit = IndLCObj::new(f, Seq::finite(vec![Tower::constant(f, 1)]));
        let l = embed_indlc(&laurent(f)).unwrap();
        let t = tensor_star_indlc(&unit, &l).unwrap();
        let lhs: Vec<_> = t.materialize(4, 3).unwrap().into_iter().map(|p| (p.dims, p.transitions)).collect();
        let rhs: Vec<_> = l.materialize(4, 3).unwrap().into_iter().map(|p| (p.dims, p.transitions)).collect();
        assert_eq!(lhs, rhs);
        let unit_pd = ProDiscObj::new(f, Seq::finite(vec![IndTower::constant(f, 1)]));
        let p = embed_prodisc(&laurent(f)).unwrap();
        let tb = tensor_bang_prodisc(&p, &unit_pd).unwrap();
        let lhs: Vec<_> = tb.materialize(4, 3).unwrap().into_iter().map(|p| (p.dims, p.transitions)).collect();
        let rhs: Vec<_> = p.materialize(4, 3).unwrap().into_iter().map(|p| (p.dims, p.transitions)).collect();
        assert_eq!(lhs, rhs);
    }
}
