//! Topological duality on presentations, and the constructive self-duality
//! and functional-extension results.
//!
//! Duals are always taken in the coordinate dual basis, so dualizing a map is
//! literally transposition and the bidual is canonically equal to the
//! original presentation.

use serde::Serialize;
use thiserror::Error;

use crate::exactla::{self, LinAlgError, Matrix};
use crate::spaces::{
    lattice_check, FilteredSpace, LatticeMode, LinMap, Presentation, SpaceError, SpaceObject, TateObj,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DualityError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("pairing matrix is not invertible")]
    PairingNotInvertible,
    #[error("pairing has shape {0:?}, expected a square matrix on the ambient space")]
    PairingShape((usize, usize)),
    #[error("given subspace is not a c-lattice of the filtered space")]
    NotCLattice,
    #[error("flag index {index} out of range 1..={max}")]
    FlagIndex { index: usize, max: usize },
    #[error("functional has shape {found:?}, expected {expected:?}")]
    FunctionalShape { expected: (usize, usize), found: (usize, usize) },
    #[error("functional does not vanish on A ∩ U_{k} (residual {residual:?})")]
    ContinuityWitness { k: usize, residual: Vec<u32> },
    #[error("bidual differs from original at level {level}: {detail}")]
    BidualMismatch { level: usize, detail: String },
}

impl From<LinAlgError> for DualityError {
    fn from(e: LinAlgError) -> Self {
        Self::Space(SpaceError::LinAlg(e))
    }
}

pub type Result<T> = std::result::Result<T, DualityError>;

pub fn dual_map(f: &LinMap) -> LinMap {
    LinMap::from_matrix(f.matrix().transpose())
}

/// Dual of an object: linearly compact and discrete pieces swap roles, level
/// dimensions are preserved and transitions transposed.
pub fn dual_object(x: &SpaceObject) -> SpaceObject {
    match x {
        SpaceObject::FinVect(v) => SpaceObject::FinVect(*v),
        SpaceObject::LinMap(f) => SpaceObject::LinMap(dual_map(f)),
        SpaceObject::Tower(t) => SpaceObject::IndTower(t.dual()),
        SpaceObject::IndTower(t) => SpaceObject::Tower(t.dual()),
        SpaceObject::Tate(t) => SpaceObject::Tate(t.dual()),
        SpaceObject::IndLC(o) => SpaceObject::ProDisc(o.dual()),
        SpaceObject::ProDisc(o) => SpaceObject::IndLC(o.dual()),
    }
}

/// Evidence that `X -> X**` is the identity at each materialized level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualityWitness {
    /// Pairing matrix of `X_n` against `(X*)_n` for every compared level.
    pub pairings: Vec<Matrix>,
    pub description: String,
}

/// The materialized levels of an object, flattened for comparison.
fn flatten(x: &SpaceObject, depth: usize) -> Result<Vec<Presentation>> {
    Ok(match x {
        SpaceObject::FinVect(_) | SpaceObject::LinMap(_) => Vec::new(),
        SpaceObject::Tower(t) => vec![t.materialize(t.clamp_depth(depth))?],
        SpaceObject::IndTower(t) => vec![t.materialize(t.clamp_depth(depth))?],
        SpaceObject::Tate(t) => {
            let p = t.materialize(depth)?;
            vec![p.c_lattice, p.d_lattice]
        }
        SpaceObject::IndLC(o) => o.materialize(depth, depth)?,
        SpaceObject::ProDisc(o) => o.materialize(depth, depth)?,
    })
}

fn compare_presentations(orig: &[Presentation], bidual: &[Presentation]) -> Result<Vec<Matrix>> {
    if orig.len() != bidual.len() {
        return Err(DualityError::BidualMismatch {
            level: 0,
            detail: format!("{} pieces vs {}", orig.len(), bidual.len()),
        });
    }
    let mut pairings = Vec::new();
    for (a, b) in orig.iter().zip(bidual) {
        if a.direction != b.direction || a.tail != b.tail {
            return Err(DualityError::BidualMismatch {
                level: 0,
                detail: "direction or tail descriptor differs".into(),
            });
        }
        for (lvl, (da, db)) in a.dims.iter().zip(&b.dims).enumerate() {
            if da != db {
                return Err(DualityError::BidualMismatch {
                    level: lvl + 1,
                    detail: format!("dimension {da} vs {db}"),
                });
            }
            pairings.push(Matrix::identity(a.field, *da));
        }
        if a.dims.len() != b.dims.len() {
            return Err(DualityError::BidualMismatch {
                level: a.dims.len().min(b.dims.len()) + 1,
                detail: "depth differs".into(),
            });
        }
        for (lvl, (ta, tb)) in a.transitions.iter().zip(&b.transitions).enumerate() {
            if ta != tb {
                return Err(DualityError::BidualMismatch {
                    level: lvl + 2,
                    detail: "transition matrices differ".into(),
                });
            }
        }
    }
    Ok(pairings)
}

/// Verifies that `dual(dual(x))` agrees with `x` levelwise up to `depth`.
pub fn bidual_check(x: &SpaceObject, depth: usize) -> Result<DualityWitness> {
    let bidual = dual_object(&dual_object(x));
    let pairings = match (x, &bidual) {
        (SpaceObject::FinVect(a), SpaceObject::FinVect(b)) => {
            if a != b {
                return Err(DualityError::BidualMismatch {
                    level: 1,
                    detail: format!("dimension {} vs {}", a.dim, b.dim),
                });
            }
            Vec::new()
        }
        (SpaceObject::LinMap(a), SpaceObject::LinMap(b)) => {
            if a != b {
                return Err(DualityError::BidualMismatch {
                    level: 1,
                    detail: "map matrices differ".into(),
                });
            }
            vec![Matrix::identity(a.matrix().field(), a.src().dim)]
        }
        _ => compare_presentations(&flatten(x, depth)?, &flatten(&bidual, depth)?)?,
    };
    Ok(DualityWitness {
        description: format!(
            "{}: level n of X pairs with level n of X* through the identity in coordinate dual bases",
            x.kind_name()
        ),
        pairings,
    })
}

/// Output of [`self_dual_decompose`].
#[derive(Debug, Clone, Serialize)]
pub struct SelfDualDecomposition {
    /// `K = L ∩ φ⁻¹(L^⊥)`, basis columns.
    pub k: Matrix,
    /// Deterministic complement of `K`.
    pub d: Matrix,
    /// `F = D ∩ φ⁻¹(K^⊥)`: the finite correction with `D ≅ K* ⊕ F`.
    pub f: Matrix,
    /// Matrix of `D -> K*`, `d ↦ φ(d)|_K`; surjective with kernel `F`.
    pub pairing: Matrix,
    /// Right inverse of `pairing` (`pairing · section = I`).
    pub section: Matrix,
    /// `[K | D]⁻¹`: coordinates adapted to `V = K ⊕ D`.
    pub split_coordinates: Matrix,
    pub k_is_zero: bool,
    pub d_is_zero: bool,
}

/// Splits a self-dual finite truncation `V` (with `φ: V -> V*` invertible,
/// `L` a c-lattice) as `V = K ⊕ D` where `K` is paired against `D` by `φ`.
///
/// `φ` is the matrix of `v ↦ φ(v)` in coordinate dual bases, so `⟨φ v, w⟩ =
/// wᵀ φ v`.
pub fn self_dual_decompose(v: &FilteredSpace, phi: &Matrix, l: &Matrix) -> Result<SelfDualDecomposition> {
    let n = v.ambient();
    if phi.shape() != (n, n) {
        return Err(DualityError::PairingShape(phi.shape()));
    }
    if !phi.is_invertible() {
        return Err(DualityError::PairingNotInvertible);
    }
    if !lattice_check(v, l, LatticeMode::Compact)?.holds {
        return Err(DualityError::NotCLattice);
    }
    let field = v.field();
    // φ⁻¹(L^⊥) = ker(Lᵀ φ)
    let phi_inv_l_perp = exactla::kernel(&l.transpose().mul(phi)?);
    let k = exactla::intersect(l, &phi_inv_l_perp)?;
    let d = exactla::complement(&k)?;
    let phi_inv_k_perp = exactla::kernel(&k.transpose().mul(phi)?);
    let f = exactla::intersect(&d, &phi_inv_k_perp)?;
    let pairing = k.transpose().mul(phi)?.mul(&d)?;

    // Certificates.
    let kd = k.hstack(&d)?;
    let split_coordinates = kd.inverse()?;
    assert!(split_coordinates.mul(&kd)?.is_identity());
    assert!(k.transpose().mul(phi)?.mul(&k)?.is_zero(), "K ⊆ φ⁻¹(K^⊥)");
    assert_eq!(f.cols() + k.cols(), d.cols(), "dim F = dim D - dim K");
    let section = exactla::factor_through(&pairing, &Matrix::identity(field, k.cols()))?;
    assert!(pairing.mul(&section)?.is_identity());
    assert!(pairing.mul(&exactla::solve_linear(&d, &f)?.expect("F ⊆ D"))?.is_zero());

    Ok(SelfDualDecomposition {
        k_is_zero: k.cols() == 0,
        d_is_zero: d.cols() == 0,
        k,
        d,
        f,
        pairing,
        section,
        split_coordinates,
    })
}

/// Quotient `B -> B/U`: coordinates along the greedy complement of `U`.
pub(crate) fn quotient_map(u: &Matrix) -> std::result::Result<Matrix, LinAlgError> {
    let c = exactla::complement(u)?;
    let basis = u.hstack(&c)?;
    let inv = basis.inverse()?;
    Ok(inv.submatrix(u.cols(), basis.rows(), 0, basis.cols()))
}

/// Extends a functional `f` on `A ⊆ B` (given on `A`'s basis columns) to
/// all of `B` so that it still vanishes on the open subspace `U_k`.
///
/// The extension descends to `B/U_k`, is set to zero on the greedy
/// complement of the image of `A`, and is pulled back.
pub fn extend_functional(b: &FilteredSpace, a: &Matrix, f: &Matrix, k: usize) -> Result<Matrix> {
    b.check_subspace(a)?;
    if k == 0 || k > b.num_flags() {
        return Err(DualityError::FlagIndex {
            index: k,
            max: b.num_flags(),
        });
    }
    if f.shape() != (1, a.cols()) {
        return Err(DualityError::FunctionalShape {
            expected: (1, a.cols()),
            found: f.shape(),
        });
    }
    let u = b.flag(k);
    // A ∩ U_k in A-coordinates must be killed by f.
    let meet = exactla::intersect(a, u)?;
    let meet_coords = exactla::solve_linear(a, &meet)?.expect("meet lies in A");
    let residual = f.mul(&meet_coords)?;
    if !residual.is_zero() {
        return Err(DualityError::ContinuityWitness {
            k,
            residual: residual.entries().to_vec(),
        });
    }
    let q = quotient_map(u)?;
    let qa = q.mul(a)?;
    // Image of A in B/U_k, spanned by the pivot columns of q·A.
    let pivots = qa.rref().pivots;
    let image = qa.select_columns(&pivots);
    let f_on_image = f.select_columns(&pivots);
    let comp = exactla::complement(&image)?;
    let adapted = image.hstack(&comp)?;
    let values = f_on_image.hstack(&Matrix::zeros(f.field(), 1, comp.cols()))?;
    let g_bar = values.mul(&adapted.inverse()?)?;
    let g = g_bar.mul(&q)?;
    debug_assert_eq!(g.mul(a)?, *f);
    Ok(g)
}

/// Continuity witness for evaluation `V* × V -> k` at a truncation level.
#[derive(Debug, Clone, Serialize)]
pub struct EvWitness {
    /// Level of the c-lattice used as the open `U` of `V`.
    pub u_level: usize,
    /// Level used as the compact `K` (the same c-lattice).
    pub k_level: usize,
    pub u_dim: usize,
    pub annihilator_dim: usize,
    /// Pairing of `U^⊥` against `U`; verified zero.
    pub pairing: Matrix,
}

pub fn ev_witness(v: &TateObj, depth: usize) -> Result<EvWitness> {
    let p = v.materialize(depth)?;
    let c = *p.c_lattice.dims.last().expect("depth >= 1");
    let d = *p.d_lattice.dims.last().expect("depth >= 1");
    let field = v.field();
    let n = c + d;
    // V_N = L_N ⊕ D_N with L first; U = K = L_N.
    let u = Matrix::identity(field, n).submatrix(0, n, 0, c);
    let annihilator = exactla::kernel(&u.transpose());
    let pairing = annihilator.transpose().mul(&u)?;
    assert!(pairing.is_zero(), "ev(U × U^⊥) = 0");
    Ok(EvWitness {
        u_level: p.c_lattice.depth(),
        k_level: p.c_lattice.depth(),
        u_dim: c,
        annihilator_dim: annihilator.cols(),
        pairing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::Field;
    use crate::random;
    use crate::spaces::{laurent, power_series, FinVect, IndTower, TailDescriptor, Tower};
    use rand::Rng;

    fn gf(p: u32) -> Field {
        Field::new(p).unwrap()
    }

    #[test]
    fn dual_power_series_is_padding_inclusions() {
        let f = gf(2);
        let d = power_series(f).dual().materialize(3).unwrap();
        assert_eq!(d.dims, vec![1, 2, 3]);
        assert_eq!(d.transitions[0], Matrix::from_rows(f, &[[1], [0]]));
        assert_eq!(d.transitions[1], Matrix::from_rows(f, &[[1, 0], [0, 1], [0, 0]]));
        // ⟨φ, g v⟩ = ⟨gᵀ φ, v⟩ on all basis pairs
        let g = power_series(f).materialize(3).unwrap().transitions[1].clone();
        for i in 0..2 {
            for j in 0..3 {
                let phi = Matrix::unit(f, 2, i);
                let v = Matrix::unit(f, 3, j);
                let lhs = phi.transpose().mul(&g.mul(&v).unwrap()).unwrap();
                let rhs = d.transitions[1].mul(&phi).unwrap().transpose().mul(&v).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn dual_laurent_swaps_lattices() {
        let f = gf(2);
        let l = laurent(f);
        let d = l.dual().materialize(4).unwrap();
        let orig = l.materialize(4).unwrap();
        assert_eq!(d.c_lattice.dims, orig.d_lattice.dims);
        assert_eq!(d.d_lattice.dims, orig.c_lattice.dims);
        for (a, b) in d.c_lattice.transitions.iter().zip(&orig.d_lattice.transitions) {
            assert_eq!(*a, b.transpose());
        }
    }

    #[test]
    fn bidual_examples() {
        let f = gf(2);
        let w = bidual_check(&SpaceObject::Tower(power_series(f)), 6).unwrap();
        assert!(w.pairings.iter().all(Matrix::is_identity));
        assert_eq!(w.pairings.len(), 6);
        bidual_check(&SpaceObject::Tate(laurent(f)), 4).unwrap();
        bidual_check(&SpaceObject::FinVect(FinVect { dim: 3 }), 1).unwrap();
        assert!(matches!(
            dual_object(&SpaceObject::FinVect(FinVect { dim: 0 })),
            SpaceObject::FinVect(FinVect { dim: 0 })
        ));
    }

    #[test]
    fn contravariance_and_invertibility() {
        let f = gf(5);
        let mut rng = random::rng(11);
        for _ in 0..50 {
            let (a, b, c) = (rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(0..5));
            let g = LinMap::from_matrix(random::matrix(&mut rng, f, b, a));
            let h = LinMap::from_matrix(random::matrix(&mut rng, f, c, b));
            let lhs = dual_map(&h.compose(&g).unwrap());
            let rhs = dual_map(&g).compose(&dual_map(&h)).unwrap();
            assert_eq!(lhs, rhs);
            let sq = random::matrix(&mut rng, f, a, a);
            assert_eq!(sq.is_invertible(), sq.transpose().is_invertible());
        }
    }

    fn laurent_window(f: Field) -> FilteredSpace {
        FilteredSpace::new(
            f,
            4,
            vec![
                Matrix::from_rows(f, &[[0, 0], [0, 0], [1, 0], [0, 1]]),
                Matrix::from_rows(f, &[[0], [0], [0], [1]]),
                Matrix::zeros(f, 4, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn residue_pairing_window() {
        let f = gf(2);
        let v = laurent_window(f);
        // ⟨t^a, t^b⟩ = δ_{a+b,-1} on basis t^-2, t^-1, 1, t
        let phi = Matrix::from_rows(f, &[[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]);
        let l = v.flag(1).clone();
        let out = self_dual_decompose(&v, &phi, &l).unwrap();
        assert!(exactla::same_span(&out.k, &l).unwrap());
        assert_eq!(out.d, Matrix::from_rows(f, &[[1, 0], [0, 1], [0, 0], [0, 0]]));
        assert_eq!(out.f.cols(), 0);
    }

    #[test]
    fn two_dim_hyperbolic() {
        let f = gf(3);
        let e1 = Matrix::from_rows(f, &[[1], [0]]);
        let v = FilteredSpace::new(f, 2, vec![e1.clone(), Matrix::zeros(f, 2, 0)]).unwrap();
        let phi = Matrix::from_rows(f, &[[0, 1], [1, 0]]);
        let out = self_dual_decompose(&v, &phi, &e1).unwrap();
        assert_eq!(out.k, e1);
        assert_eq!(out.d, Matrix::from_rows(f, &[[0], [1]]));
    }

    #[test]
    fn self_dual_errors() {
        let f = gf(2);
        let v = laurent_window(f);
        let l = v.flag(1).clone();
        assert_eq!(
            self_dual_decompose(&v, &Matrix::zeros(f, 4, 4), &l).unwrap_err(),
            DualityError::PairingNotInvertible
        );
        let not_open = Matrix::from_rows(f, &[[0], [1], [0], [0]]);
        assert_eq!(
            self_dual_decompose(&v, &Matrix::identity(f, 4), &not_open).unwrap_err(),
            DualityError::NotCLattice
        );
    }

    #[test]
    fn scrambled_hyperbolic_recovers_dimension() {
        for (seed, p) in (0..25u64).zip([2u32, 5].into_iter().cycle()) {
            let f = gf(p);
            let mut rng = random::rng(seed);
            let d = rng.gen_range(1..5);
            let n = 2 * d;
            // V = D0 ⊕ D0*, compact part D0* in the last d coordinates.
            let phi = Matrix::zeros(f, d, d)
                .hstack(&Matrix::identity(f, d))
                .unwrap()
                .vstack(&Matrix::identity(f, d).hstack(&Matrix::zeros(f, d, d)).unwrap())
                .unwrap();
            let mut flags = Vec::new();
            let mut k = d;
            loop {
                flags.push(Matrix::identity(f, n).submatrix(0, n, n - k, n));
                if k == 0 {
                    break;
                }
                k -= rng.gen_range(1..=k);
            }
            let base = FilteredSpace::new(f, n, flags).unwrap();
            let s = random::lower_triangular(&mut rng, f, n);
            let s_inv = s.inverse().unwrap();
            let v = base.transform(&s).unwrap();
            let phi_s = s_inv.transpose().mul(&phi).unwrap().mul(&s_inv).unwrap();
            let l = v.flag(1).clone();
            let out = self_dual_decompose(&v, &phi_s, &l).unwrap();
            assert_eq!(out.d.cols(), d, "seed {seed}");
        }
    }

    #[test]
    fn extend_functional_example() {
        let f = gf(2);
        let b = FilteredSpace::new(
            f,
            3,
            vec![
                Matrix::from_rows(f, &[[0, 0], [1, 0], [0, 1]]),
                Matrix::from_rows(f, &[[0], [0], [1]]),
                Matrix::zeros(f, 3, 0),
            ],
        )
        .unwrap();
        let a = Matrix::from_rows(f, &[[1], [1], [0]]);
        let fa = Matrix::from_rows(f, &[[1]]);
        let g = extend_functional(&b, &a, &fa, 3).unwrap();
        // Greedy complement of span{1+t} is {1, t²}, so g(1)=g(t²)=0, g(t)=1.
        assert_eq!(g, Matrix::from_rows(f, &[[0, 1, 0]]));
        assert_eq!(g.mul(&a).unwrap(), fa);

        let zero = extend_functional(&b, &a, &Matrix::zeros(f, 1, 1), 3).unwrap();
        assert!(zero.is_zero());

        let id = Matrix::identity(f, 3);
        let full = Matrix::from_rows(f, &[[1, 0, 1]]);
        assert_eq!(extend_functional(&b, &id, &full, 3).unwrap(), full);

        // f(1+t) = 1 but 1+t ∉ U_1, while A ∩ U_1 = 0: witness k=1 works too.
        let g1 = extend_functional(&b, &a, &fa, 1).unwrap();
        assert!(g1.mul(b.flag(1)).unwrap().is_zero());
    }

    #[test]
    fn extend_functional_rejects_discontinuous() {
        let f = gf(2);
        let b = FilteredSpace::new(
            f,
            2,
            vec![Matrix::from_rows(f, &[[0], [1]]), Matrix::zeros(f, 2, 0)],
        )
        .unwrap();
        let a = Matrix::from_rows(f, &[[0], [1]]);
        let err = extend_functional(&b, &a, &Matrix::from_rows(f, &[[1]]), 1).unwrap_err();
        assert!(matches!(err, DualityError::ContinuityWitness { k: 1, .. }));
        assert!(matches!(
            extend_functional(&b, &a, &Matrix::from_rows(f, &[[1]]), 7),
            Err(DualityError::FlagIndex { .. })
        ));
    }

    #[test]
    fn ev_witness_cases() {
        let f = gf(2);
        let w = ev_witness(&laurent(f), 3).unwrap();
        assert_eq!((w.u_level, w.k_level, w.u_dim, w.annihilator_dim), (3, 3, 3, 3));
        let fin = ev_witness(&TateObj::finite(f, 4), 2).unwrap();
        assert_eq!((fin.u_dim, fin.annihilator_dim), (0, 4));
        let compact = TateObj::new(Tower::constant(f, 2), IndTower::zero(f));
        assert_eq!(ev_witness(&compact, 2).unwrap().u_dim, 2);
        let _ = TailDescriptor::Unspecified;
    }
}
