//! Constructive splittings of short exact sequences of filtered spaces.
//!
//! A filtered space `B` with flags `U_1 ⊇ ... ⊇ U_m = 0` is handled through
//! its discrete quotients `B/U_k`. A splitting at level `k` is lifted to
//! level `k + 1` by [`lift_splitting`], and the last level is `B` itself.

use serde::Serialize;
use thiserror::Error;

use crate::duality::quotient_map;
use crate::exactla::{self, LinAlgError, Matrix};
use crate::spaces::{FilteredSpace, SpaceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("row {row} is not a short exact sequence: {detail}")]
    NotExact { row: usize, detail: &'static str },
    #[error("the {square} square does not commute")]
    NotCommuting { square: &'static str },
    #[error("vertical map f is not surjective")]
    NotSurjective,
    #[error("pi1 is not a retraction of i1")]
    NotRetraction,
    #[error("not an isomorphism: {0}")]
    NotIsomorphism(String),
}

impl From<LinAlgError> for SplitError {
    fn from(e: LinAlgError) -> Self {
        Self::Space(SpaceError::LinAlg(e))
    }
}

pub type Result<T> = std::result::Result<T, SplitError>;

/// `0 -> A -> B -> C -> 0` as matrices `i: A -> B`, `p: B -> C`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShortExact {
    pub i: Matrix,
    pub p: Matrix,
}

impl ShortExact {
    fn check(&self, row: usize) -> Result<()> {
        let (i, p) = (&self.i, &self.p);
        if i.rows() != p.cols() {
            return Err(SplitError::NotExact {
                row,
                detail: "i and p are not composable",
            });
        }
        if i.rank() != i.cols() {
            return Err(SplitError::NotExact {
                row,
                detail: "i is not injective",
            });
        }
        if p.rank() != p.rows() {
            return Err(SplitError::NotExact {
                row,
                detail: "p is not surjective",
            });
        }
        if !p.mul(i)?.is_zero() || i.cols() + p.rows() != i.rows() {
            return Err(SplitError::NotExact {
                row,
                detail: "image of i is not the kernel of p",
            });
        }
        Ok(())
    }
}

/// Two short exact rows (`bottom` maps onto `top`) with vertical maps
/// `f: A₂ -> A₁`, `g: B₂ -> B₁`, `h: C₂ -> C₁`.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub top: ShortExact,
    pub bottom: ShortExact,
    pub f: Matrix,
    pub g: Matrix,
    pub h: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftedSplitting {
    /// Retraction `B₂ -> A₂` with `pi2 i₂ = id` and `f pi2 = pi1 g`.
    pub pi2: Matrix,
    /// Section `C₁ -> B₁` with `p₁ s1 = id`, `pi1 s1 = 0`.
    pub s1: Matrix,
    /// Section `C₂ -> B₂` with `p₂ s2 = id`, `pi2 s2 = 0`, `g s2 = s1 h`.
    pub s2: Matrix,
    /// The correction `θ` applied to the chosen complement.
    pub theta: Matrix,
}

/// Section of `p` with image `ker pi`.
fn section_along(p: &Matrix, pi: &Matrix) -> Result<Matrix> {
    let k = exactla::kernel(pi);
    let pk = p.mul(&k)?;
    Ok(k.mul(&pk.inverse()?)?)
}

/// Lifts a splitting `pi1` of the top row to a compatible splitting of the
/// bottom row.
///
/// A complement `S₂` of `im i₂` is chosen greedily, `α = pi1 g|_{S₂}` is
/// factored as `f θ`, `S₂` is replaced by the graph of `-θ`, and `pi2` is
/// the projection along it.
pub fn lift_splitting(ladder: &Ladder, pi1: &Matrix) -> Result<LiftedSplitting> {
    let Ladder { top, bottom, f, g, h } = ladder;
    top.check(1)?;
    bottom.check(2)?;
    if g.mul(&bottom.i)? != top.i.mul(f)? {
        return Err(SplitError::NotCommuting { square: "left" });
    }
    if top.p.mul(g)? != h.mul(&bottom.p)? {
        return Err(SplitError::NotCommuting { square: "right" });
    }
    if f.rank() != f.rows() {
        return Err(SplitError::NotSurjective);
    }
    if !pi1.mul(&top.i)?.is_identity() {
        return Err(SplitError::NotRetraction);
    }
    let field = f.field();
    let a2 = bottom.i.cols();
    let s2 = exactla::complement(&bottom.i)?;
    let alpha = pi1.mul(g)?.mul(&s2)?;
    let theta = exactla::factor_through(f, &alpha)?;
    let adapted = bottom.i.hstack(&s2)?;
    let pi2 = Matrix::identity(field, a2).hstack(&theta)?.mul(&adapted.inverse()?)?;

    let sec1 = section_along(&top.p, pi1)?;
    let sec2 = section_along(&bottom.p, &pi2)?;

    assert!(pi2.mul(&bottom.i)?.is_identity(), "pi2 i2 = id");
    assert_eq!(f.mul(&pi2)?, pi1.mul(g)?, "f pi2 = pi1 g");
    assert!(top.p.mul(&sec1)?.is_identity() && bottom.p.mul(&sec2)?.is_identity());
    assert!(pi1.mul(&sec1)?.is_zero() && pi2.mul(&sec2)?.is_zero());
    assert_eq!(g.mul(&sec2)?, sec1.mul(h)?, "g s2 = s1 h");

    Ok(LiftedSplitting {
        pi2,
        s1: sec1,
        s2: sec2,
        theta,
    })
}

/// Splitting data of `0 -> A -> B -> B/A -> 0` at one flag level.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSplitting {
    /// Flag index `k` (1-based); the level is `B/U_k`.
    pub level: usize,
    /// `A/(A∩U_k) -> B/U_k`.
    pub i: Matrix,
    /// `B/U_k -> B/(A+U_k)`.
    pub p: Matrix,
    /// Retraction `B/U_k -> A/(A∩U_k)`.
    pub pi: Matrix,
    /// Section `B/(A+U_k) -> B/U_k`.
    pub s: Matrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitCertificate {
    /// Retraction `B -> A` in `A`'s basis coordinates.
    pub pi: Matrix,
    /// Section `B/A -> B` (quotient in greedy-complement coordinates).
    pub s: Matrix,
    /// Quotient map `B -> B/A`.
    pub p: Matrix,
    pub levels: Vec<LevelSplitting>,
    /// `dim (A ∩ U_k)` for each flag, the targets of `π(U_k)`.
    pub flag_dims: Vec<usize>,
}

/// Quotient data of a subspace `A ⊆ B` at one flag.
struct Level {
    qb: Matrix,
    qa: Matrix,
    qc: Matrix,
    row: ShortExact,
}

fn right_inverse(q: &Matrix) -> Result<Matrix> {
    Ok(exactla::factor_through(q, &Matrix::identity(q.field(), q.rows()))?)
}

fn level_data(b: &FilteredSpace, a: &Matrix, u: &Matrix) -> Result<Level> {
    let qb = quotient_map(u)?;
    let meet = exactla::intersect(a, u)?;
    let meet_coords = exactla::solve_linear(a, &meet)?.expect("meet lies in A");
    let qa = quotient_map(&meet_coords)?;
    let sum = exactla::image(&a.hstack(u)?);
    let qc = quotient_map(&sum)?;
    let i = qb.mul(a)?.mul(&right_inverse(&qa)?)?;
    let p = qc.mul(&right_inverse(&qb)?)?;
    debug_assert_eq!(qb.cols(), b.ambient());
    Ok(Level {
        qb,
        qa,
        qc,
        row: ShortExact { i, p },
    })
}

/// Builds compatible splittings `π_k: B/U_k -> A/(A∩U_k)` flag by flag and
/// assembles `π: B -> A` with `π(U_k) ⊆ A ∩ U_k` for every `k`.
pub fn split_filtered_ses(b: &FilteredSpace, a: &Matrix) -> Result<SplitCertificate> {
    b.check_subspace(a)?;
    let field = b.field();
    let n = b.ambient();
    // Level 0 is the zero quotient B/B.
    let mut prev = level_data(b, a, &Matrix::identity(field, n))?;
    let mut pi_prev = Matrix::zeros(field, 0, 0);
    let mut levels = Vec::with_capacity(b.num_flags());
    for k in 1..=b.num_flags() {
        let cur = level_data(b, a, b.flag(k))?;
        let ladder = Ladder {
            top: prev.row.clone(),
            bottom: cur.row.clone(),
            f: prev.qa.mul(&right_inverse(&cur.qa)?)?,
            g: prev.qb.mul(&right_inverse(&cur.qb)?)?,
            h: prev.qc.mul(&right_inverse(&cur.qc)?)?,
        };
        let lifted = lift_splitting(&ladder, &pi_prev)?;
        levels.push(LevelSplitting {
            level: k,
            i: cur.row.i.clone(),
            p: cur.row.p.clone(),
            pi: lifted.pi2.clone(),
            s: lifted.s2.clone(),
        });
        pi_prev = lifted.pi2;
        prev = cur;
    }
    // U_m = 0, so the last level is B itself in its own coordinates.
    assert!(prev.qb.is_identity() && prev.qa.is_identity());
    let last = levels.last().expect("at least one flag");
    let pi = last.pi.clone();
    let s = last.s.clone();
    let p = prev.qc.clone();

    // Certificates.
    assert!(pi.mul(a)?.is_identity(), "π ∘ incl_A = id");
    assert!(p.mul(&s)?.is_identity(), "p ∘ s = id");
    assert!(pi.mul(&s)?.is_zero(), "π ∘ s = 0");
    let mut flag_dims = Vec::with_capacity(b.num_flags());
    for k in 1..=b.num_flags() {
        let u = b.flag(k);
        let meet = exactla::intersect(a, u)?;
        let image = a.mul(&pi.mul(u)?)?;
        assert!(exactla::span_contains(&meet, &image)?, "π(U_k) ⊆ A ∩ U_k");
        flag_dims.push(meet.cols());
    }
    Ok(SplitCertificate {
        pi,
        s,
        p,
        levels,
        flag_dims,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplementCertificate {
    /// Basis of the complement `S = ker π`.
    pub complement: Matrix,
    /// Projection onto `A` along `S`, as an endomorphism of `B`.
    pub proj_a: Matrix,
    /// Projection onto `S` along `A`.
    pub proj_s: Matrix,
}

/// Flag-compatible complement of `A`: both projections map every `U_k`
/// into itself.
pub fn topological_complement(b: &FilteredSpace, a: &Matrix) -> Result<ComplementCertificate> {
    let cert = split_filtered_ses(b, a)?;
    let complement = exactla::kernel(&cert.pi);
    let field = b.field();
    let proj_a = a.mul(&cert.pi)?;
    let proj_s = Matrix::identity(field, b.ambient()).sub(&proj_a)?;
    assert_eq!(a.cols() + complement.cols(), b.ambient());
    assert_eq!(exactla::intersect(a, &complement)?.cols(), 0);
    for u in b.flags() {
        assert!(exactla::span_contains(u, &proj_a.mul(u)?)?);
        assert!(exactla::span_contains(u, &proj_s.mul(u)?)?);
    }
    Ok(ComplementCertificate {
        complement,
        proj_a,
        proj_s,
    })
}

/// One truncation of a map between filtered spaces.
#[derive(Debug, Clone)]
pub struct MapTruncation {
    pub src: FilteredSpace,
    pub dst: FilteredSpace,
    pub map: Matrix,
}

/// For each target flag `j`, the least source flag `k` with
/// `g(U_k) ⊆ U'_j`.
pub fn continuity_modulus(src: &FilteredSpace, dst: &FilteredSpace, g: &Matrix) -> Result<Vec<usize>> {
    (1..=dst.num_flags())
        .map(|j| {
            for k in 1..=src.num_flags() {
                if exactla::span_contains(dst.flag(j), &g.mul(src.flag(k))?)? {
                    return Ok(k);
                }
            }
            unreachable!("the last source flag is zero")
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoCertificate {
    pub inverses: Vec<Matrix>,
    pub forward_modulus: Vec<usize>,
    pub inverse_modulus: Vec<usize>,
}

/// Certifies a topological isomorphism from a sequence of deeper and deeper
/// truncations.
///
/// Every truncation has a zero flag, so a single one always looks
/// continuous. The certificate is issued only when each truncated map is
/// bijective and the continuity moduli of the map and of its inverse agree
/// across all truncations on the flag indices they share.
pub fn isomorphism_certificate(truncations: &[MapTruncation]) -> Result<IsoCertificate> {
    if truncations.len() < 2 {
        return Err(SplitError::NotIsomorphism("need at least two truncation depths".into()));
    }
    let mut inverses = Vec::new();
    let mut fwd: Vec<Vec<usize>> = Vec::new();
    let mut bwd: Vec<Vec<usize>> = Vec::new();
    for (d, t) in truncations.iter().enumerate() {
        if !t.map.is_invertible() {
            return Err(SplitError::NotIsomorphism(format!("truncation {d} is not bijective")));
        }
        let inv = t.map.inverse()?;
        fwd.push(continuity_modulus(&t.src, &t.dst, &t.map)?);
        bwd.push(continuity_modulus(&t.dst, &t.src, &inv)?);
        inverses.push(inv);
    }
    for (name, moduli) in [("map", &fwd), ("inverse", &bwd)] {
        // A flag index is shared when it is a proper (non-terminal) flag at every depth.
        let shared = moduli.iter().map(|m| m.len().saturating_sub(1)).min().unwrap_or(0).max(1);
        for j in 0..shared {
            let first = moduli[0][j];
            if let Some(d) = moduli.iter().position(|m| m[j] != first) {
                return Err(SplitError::NotIsomorphism(format!(
                    "continuity modulus of the {name} at flag {} changes from {first} to {} at truncation {d}",
                    j + 1,
                    moduli[d][j]
                )));
            }
        }
    }
    Ok(IsoCertificate {
        inverses,
        forward_modulus: fwd.pop().expect("nonempty"),
        inverse_modulus: bwd.pop().expect("nonempty"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::Field;
    use crate::random;
    use rand::Rng;

    fn gf(p: u32) -> Field {
        Field::new(p).unwrap()
    }

    fn e1_row(f: Field) -> ShortExact {
        ShortExact {
            i: Matrix::from_rows(f, &[[1], [0]]),
            p: Matrix::from_rows(f, &[[0, 1]]),
        }
    }

    #[test]
    fn lift_example() {
        let f = gf(2);
        let ladder = Ladder {
            top: e1_row(f),
            bottom: e1_row(f),
            f: Matrix::identity(f, 1),
            g: Matrix::from_rows(f, &[[1, 1], [0, 1]]),
            h: Matrix::identity(f, 1),
        };
        let out = lift_splitting(&ladder, &Matrix::from_rows(f, &[[1, 0]])).unwrap();
        assert_eq!(out.pi2, Matrix::from_rows(f, &[[1, 1]]));

        let diag = Ladder {
            g: Matrix::identity(f, 2),
            ..ladder.clone()
        };
        let out = lift_splitting(&diag, &Matrix::from_rows(f, &[[1, 0]])).unwrap();
        assert_eq!(out.pi2, Matrix::from_rows(f, &[[1, 0]]));
        assert!(out.theta.is_zero());
    }

    #[test]
    fn lift_with_zero_cokernel() {
        let f = gf(3);
        let row = ShortExact {
            i: Matrix::identity(f, 2),
            p: Matrix::zeros(f, 0, 2),
        };
        let ladder = Ladder {
            top: row.clone(),
            bottom: row,
            f: Matrix::identity(f, 2),
            g: Matrix::identity(f, 2),
            h: Matrix::zeros(f, 0, 0),
        };
        let out = lift_splitting(&ladder, &Matrix::identity(f, 2)).unwrap();
        assert_eq!(out.s2.shape(), (2, 0));
        assert!(out.pi2.is_identity());
    }

    #[test]
    fn lift_rejects_bad_ladders() {
        let f = gf(2);
        let mut ladder = Ladder {
            top: e1_row(f),
            bottom: e1_row(f),
            f: Matrix::identity(f, 1),
            g: Matrix::identity(f, 2),
            h: Matrix::identity(f, 1),
        };
        let pi1 = Matrix::from_rows(f, &[[1, 0]]);
        assert_eq!(
            lift_splitting(&ladder, &Matrix::from_rows(f, &[[0, 1]])).unwrap_err(),
            SplitError::NotRetraction
        );
        ladder.g = Matrix::from_rows(f, &[[1, 0], [1, 1]]);
        assert!(matches!(lift_splitting(&ladder, &pi1), Err(SplitError::NotCommuting { .. })));
        ladder.g = Matrix::identity(f, 2);
        ladder.bottom.p = Matrix::from_rows(f, &[[1, 1]]);
        assert!(matches!(lift_splitting(&ladder, &pi1), Err(SplitError::NotExact { row: 2, .. })));
    }

    /// Random ladders: bottom row in standard position, top row its image
    /// under random surjections, then compared against the algebraic laws.
    #[test]
    fn random_ladders_commute() {
        for seed in 0..40u64 {
            let f = if seed % 2 == 0 { gf(2) } else { gf(5) };
            let mut rng = random::rng(seed);
            let (a2, c2) = (rng.gen_range(1..4), rng.gen_range(0..3));
            let (a1, c1) = (rng.gen_range(0..=a2), rng.gen_range(0..=c2));
            // Bottom: A₂ ⊕ C₂ in standard coordinates.
            let bottom = ShortExact {
                i: Matrix::identity(f, a2 + c2).submatrix(0, a2 + c2, 0, a2),
                p: Matrix::identity(f, a2 + c2).submatrix(a2, a2 + c2, 0, a2 + c2),
            };
            let fa = random::matrix(&mut rng, f, a1, a2);
            if fa.rank() != a1 {
                continue;
            }
            let hc = random::matrix(&mut rng, f, c1, c2);
            let cross = random::matrix(&mut rng, f, a1, c2);
            let top = ShortExact {
                i: Matrix::identity(f, a1 + c1).submatrix(0, a1 + c1, 0, a1),
                p: Matrix::identity(f, a1 + c1).submatrix(a1, a1 + c1, 0, a1 + c1),
            };
            let g = fa
                .hstack(&cross)
                .unwrap()
                .vstack(&Matrix::zeros(f, c1, a2).hstack(&hc).unwrap())
                .unwrap();
            let pi1 = Matrix::identity(f, a1).hstack(&random::matrix(&mut rng, f, a1, c1)).unwrap();
            let ladder = Ladder {
                top,
                bottom,
                f: fa.clone(),
                g: g.clone(),
                h: hc.clone(),
            };
            let out = lift_splitting(&ladder, &pi1).unwrap();
            assert_eq!(fa.mul(&out.pi2).unwrap(), pi1.mul(&g).unwrap());
            assert_eq!(g.mul(&out.s2).unwrap(), out.s1.mul(&hc).unwrap());
        }
    }

    fn truncated_power_series(f: Field, n: usize) -> FilteredSpace {
        let id = Matrix::identity(f, n);
        FilteredSpace::new(f, n, (1..=n).map(|j| id.submatrix(0, n, j, n)).collect()).unwrap()
    }

    #[test]
    fn split_examples() {
        let f = gf(2);
        let b = truncated_power_series(f, 3);
        let a = Matrix::from_rows(f, &[[0], [0], [1]]);
        let cert = split_filtered_ses(&b, &a).unwrap();
        assert_eq!(cert.pi, Matrix::from_rows(f, &[[0, 0, 1]]));
        assert_eq!(cert.flag_dims, vec![1, 1, 0]);

        let id = Matrix::identity(f, 3);
        assert!(split_filtered_ses(&b, &id).unwrap().pi.is_identity());
        let zero = split_filtered_ses(&b, &Matrix::zeros(f, 3, 0)).unwrap();
        assert_eq!(zero.pi.shape(), (0, 3));
    }

    #[test]
    fn complement_examples() {
        let f = gf(2);
        let b = FilteredSpace::new(
            f,
            2,
            vec![Matrix::from_rows(f, &[[0], [1]]), Matrix::zeros(f, 2, 0)],
        )
        .unwrap();
        let a = Matrix::from_rows(f, &[[1], [1]]);
        let c = topological_complement(&b, &a).unwrap();
        assert_eq!(c.complement.cols(), 1);
        assert!(exactla::span_contains(&c.complement, b.flag(1)).unwrap());

        let z = topological_complement(&b, &Matrix::zeros(f, 2, 0)).unwrap();
        assert!(z.proj_s.is_identity());

        let open = Matrix::identity(f, 2).submatrix(0, 2, 1, 2);
        let oc = topological_complement(&b, &open).unwrap();
        assert_eq!(oc.complement.cols(), 1);
    }

    #[test]
    fn random_splittings() {
        for seed in 0..100u64 {
            let f = if seed % 2 == 0 { gf(2) } else { gf(5) };
            let mut rng = random::rng(1000 + seed);
            let n = rng.gen_range(1..=12);
            let b = random::filtered_space(&mut rng, f, n, 6);
            let k = rng.gen_range(0..=n);
            let a = random::subspace(&mut rng, f, n, k);
            let cert = split_filtered_ses(&b, &a).unwrap();
            assert!(cert.pi.mul(&a).unwrap().is_identity());
            let c = topological_complement(&b, &a).unwrap();
            assert_eq!(a.cols() + c.complement.cols(), n);
        }
    }

    #[test]
    fn open_mapping_counterexample_refused() {
        let f = gf(2);
        let mut discrete_to_compact = Vec::new();
        let mut compact_to_compact = Vec::new();
        for n in 2..6 {
            let compact = truncated_power_series(f, n);
            let discrete = FilteredSpace::new(f, n, vec![Matrix::zeros(f, n, 0)]).unwrap();
            discrete_to_compact.push(MapTruncation {
                src: discrete,
                dst: compact.clone(),
                map: Matrix::identity(f, n),
            });
            compact_to_compact.push(MapTruncation {
                src: compact.clone(),
                dst: compact,
                map: Matrix::identity(f, n),
            });
        }
        // Continuous bijection, but the inverse needs ever deeper flags.
        let err = isomorphism_certificate(&discrete_to_compact).unwrap_err();
        assert!(matches!(err, SplitError::NotIsomorphism(ref m) if m.contains("inverse")), "{err}");
        let ok = isomorphism_certificate(&compact_to_compact).unwrap();
        assert_eq!(ok.forward_modulus, vec![1, 2, 3, 4, 5]);
    }
}
