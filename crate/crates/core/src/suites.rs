//! Randomized law suites, one law per documented invariant. Each law draws
//! its own seeded instances, so results do not depend on execution order.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bidirected::{assemble_coproduct, assemble_product, check_dual_decomposition, check_pd_intertwine, kappa_check, rfh_decompose, split_grid, verify_split};
use crate::duality::{self, bidual_check, dual_map, extend_functional, self_dual_decompose};
use crate::exactla::{self, kron, Field, Matrix};
use crate::spaces::{self, is_tate_verdict, lattice_check, FilteredSpace, IndLCObj, IndTower, LatticeMode, LinMap, ProDiscObj, Seq, SpaceObject, SystemRef, TailDescriptor, Tower, Verdict};
use crate::splitting::{isomorphism_certificate, lift_splitting, split_filtered_ses, topological_complement, Ladder, MapTruncation, ShortExact};
use crate::tensor::{self, associator_permutation, curry, swap_permutation, uncurry};
use crate::{gen, random};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Laws,
    Grid,
    Appendix,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "laws" => Ok(Self::Laws),
            "grid" => Ok(Self::Grid),
            "appendix" => Ok(Self::Appendix),
            other => Err(format!("unknown suite \"{other}\" (expected laws, grid or appendix)")),
        }
    }
}

type LawFn = fn(&mut ChaCha8Rng) -> Result<usize, String>;

pub struct Law {
    pub id: &'static str,
    pub module: &'static str,
    pub statement: &'static str,
    run: LawFn,
}

#[derive(Debug, Clone, Serialize)]
pub struct LawResult {
    pub id: &'static str,
    pub module: &'static str,
    pub statement: &'static str,
    pub instances: usize,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub laws: Vec<LawResult>,
}

fn gf(p: u32) -> Field {
    Field::new(p).expect("prime")
}

fn fields(i: usize) -> Field {
    gf(if i.is_multiple_of(2) { 2 } else { 5 })
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

// exactla

fn law_solve(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut count = 0;
    for p in [2, 3, 5, 101] {
        let f = gf(p);
        for t in 0..1000 {
            let (r, c, k) = (rng.gen_range(0..=8), rng.gen_range(0..=8), rng.gen_range(0..=3));
            let m = random::matrix(rng, f, r, c);
            let b = m.mul(&random::matrix(rng, f, c, k)).map_err(e)?;
            let x = exactla::solve_linear(&m, &b).map_err(e)?.ok_or_else(|| format!("GF({p}) system {t}: consistent system reported unsolvable"))?;
            check(m.mul(&x).map_err(e)? == b, || format!("GF({p}) system {t}: MX != B"))?;
            count += 1;
        }
    }
    Ok(count)
}

fn law_kernel_image(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..300 {
        let f = fields(t);
        let (r, c) = (rng.gen_range(0..=8), rng.gen_range(0..=8));
        let m = random::matrix(rng, f, r, c);
        let k = exactla::kernel(&m);
        check(m.mul(&k).map_err(e)?.is_zero(), || format!("instance {t}: M·K != 0"))?;
        let im = exactla::image(&m);
        check(k.rank() + im.rank() == m.cols(), || format!("instance {t}: rank-nullity fails"))?;
    }
    Ok(300)
}

fn law_complement(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..300 {
        let f = fields(t);
        let n = rng.gen_range(0..=10);
        let k = rng.gen_range(0..=n);
        let s = random::subspace(rng, f, n, k);
        let c1 = exactla::complement(&s).map_err(e)?;
        let c2 = exactla::complement(&s).map_err(e)?;
        check(c1 == c2, || format!("instance {t}: complement not deterministic"))?;
        check(s.hstack(&c1).map_err(e)?.rank() == n && s.cols() + c1.cols() == n, || format!("instance {t}: S ⊕ C != ambient"))?;
    }
    Ok(300)
}

fn law_kron(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..200 {
        let f = fields(t);
        let d: Vec<usize> = (0..6).map(|_| rng.gen_range(0..=3)).collect();
        let a1 = random::matrix(rng, f, d[0], d[1]);
        let a2 = random::matrix(rng, f, d[1], d[2]);
        let b1 = random::matrix(rng, f, d[3], d[4]);
        let b2 = random::matrix(rng, f, d[4], d[5]);
        let lhs = kron(&a1.mul(&a2).map_err(e)?, &b1.mul(&b2).map_err(e)?).map_err(e)?;
        let rhs = kron(&a1, &b1).map_err(e)?.mul(&kron(&a2, &b2).map_err(e)?).map_err(e)?;
        check(lhs == rhs, || format!("instance {t}: mixed-product law fails"))?;
    }
    Ok(200)
}

// spaces

fn law_truncation(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut count = 0;
    for t in 0..100 {
        let f = fields(t);
        let n = rng.gen_range(2..=6);
        let short = rng.gen_range(1..n);
        let tw = random::tower(rng, f, n, 5);
        let it = random::indtower(rng, f, n, 5);
        let pairs = [
            (tw.materialize(n), tw.materialize(short)),
            (it.materialize(n), it.materialize(short)),
            (spaces::power_series(f).materialize(n), spaces::power_series(f).materialize(short)),
            (spaces::polynomial(f).materialize(n), spaces::polynomial(f).materialize(short)),
        ];
        for (long, s) in pairs {
            check(long.map_err(e)?.truncate(short) == s.map_err(e)?, || format!("instance {t}: truncation differs"))?;
            count += 1;
        }
    }
    Ok(count)
}

fn law_normalize(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..200 {
        let f = fields(t);
        let n = rng.gen_range(1..=6);
        let it = random::indtower(rng, f, n, 6);
        let out = spaces::normalize_indtower(&it, n).map_err(e)?;
        for (lvl, tr) in out.presentation.transitions.iter().enumerate() {
            check(tr.rank() == tr.cols(), || format!("instance {t}: level {} transition not injective", lvl + 2))?;
        }
        let top = it.materialize(n).map_err(e)?.dims[n - 1];
        check(out.presentation.dims[n - 1] == top && out.bases[n - 1].is_identity(), || format!("instance {t}: top level changed"))?;
    }
    Ok(200)
}

fn law_lattice_pair(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..200 {
        let f = fields(t);
        let n = rng.gen_range(1..=10);
        let b = random::filtered_space(rng, f, n, 6);
        let usable = if b.num_flags() == 1 { 1 } else { b.num_flags() - 1 };
        let k = rng.gen_range(1..=usable);
        let ne = rng.gen_range(0..=2);
        let extra = random::matrix(rng, f, n, ne);
        let s = exactla::image(&b.flag(k).hstack(&extra).map_err(e)?);
        let s2 = exactla::complement(&s).map_err(e)?;
        let c = lattice_check(&b, &s, LatticeMode::Compact).map_err(e)?;
        let d = lattice_check(&b, &s2, LatticeMode::Discrete).map_err(e)?;
        check(c.holds && d.holds, || format!("instance {t}: complementary pair not (c, d)-lattices"))?;
    }
    Ok(200)
}

fn law_tate_verdict(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let f = gf(2);
    for depth in 1..=8 {
        let v = is_tate_verdict(SystemRef::Tower(&spaces::power_series(f)), depth).map_err(e)?;
        check(v.verdict == Verdict::Tate, || format!("power series not Tate at depth {depth}"))?;
    }
    let mut count = 8;
    for t in 0..60 {
        let f = fields(t);
        let base = random::tower(rng, f, 6, 4);
        let p = base.materialize(6).map_err(e)?;
        let maxk = p.kernel_dims().into_iter().max().unwrap_or(0);
        for tail in [TailDescriptor::Stabilizing, TailDescriptor::BoundedKer(maxk), TailDescriptor::Unbounded, TailDescriptor::Unspecified] {
            let tw = Tower::explicit(f, p.dims.clone(), p.transitions.clone(), tail).map_err(e)?;
            let verdicts: Vec<Verdict> = (1..=6).map(|d| is_tate_verdict(SystemRef::Tower(&tw), d).map(|v| v.verdict)).collect::<Result<_, _>>().map_err(e)?;
            check(!(verdicts.contains(&Verdict::Tate) && verdicts.contains(&Verdict::NotTate)), || format!("instance {t}: verdict flips for {}", tail.kind_name()))?;
            count += 1;
        }
    }
    Ok(count)
}

// duality

fn random_object(rng: &mut ChaCha8Rng, f: Field, kind: usize) -> SpaceObject {
    let depth = rng.gen_range(1..=6);
    match kind {
        0 => SpaceObject::Tower(random::tower(rng, f, depth, 8)),
        1 => SpaceObject::IndTower(random::indtower(rng, f, depth, 8)),
        2 => SpaceObject::Tate(random::tate(rng, f, depth, 8)),
        3 => SpaceObject::IndLC(random::indlc(rng, f, 3, depth, 4)),
        _ => SpaceObject::ProDisc(random::indlc(rng, f, 3, depth, 4).dual()),
    }
}

fn law_involution(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut count = 0;
    for kind in 0..5 {
        for t in 0..200 {
            let x = random_object(rng, fields(t), kind);
            bidual_check(&x, 6).map_err(|err| format!("{} instance {t}: {err}", x.kind_name()))?;
            count += 1;
        }
    }
    Ok(count)
}

fn law_contravariance(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..200 {
        let f = fields(t);
        let (a, b, c) = (rng.gen_range(0..=5), rng.gen_range(0..=5), rng.gen_range(0..=5));
        let g = LinMap::from_matrix(random::matrix(rng, f, b, a));
        let h = LinMap::from_matrix(random::matrix(rng, f, c, b));
        let lhs = dual_map(&h.compose(&g).map_err(e)?);
        let rhs = dual_map(&g).compose(&dual_map(&h)).map_err(e)?;
        check(lhs == rhs, || format!("instance {t}: dual(h∘g) != dual(g)∘dual(h)"))?;
    }
    Ok(200)
}

fn law_invertible_dual(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..200 {
        let f = fields(t);
        let n = rng.gen_range(0..=5);
        let m = if t % 3 == 0 { random::invertible(rng, f, n) } else { random::matrix(rng, f, n, n) };
        let d = dual_map(&LinMap::from_matrix(m.clone()));
        check(m.is_invertible() == d.matrix().is_invertible(), || format!("instance {t}: invertibility differs from its dual"))?;
    }
    Ok(200)
}

/// `V = D₀ ⊕ D₀*` with the hyperbolic form and flags inside `D₀*`, scrambled
/// by a flag-preserving automorphism. Returns the space, form, c-lattice and
/// planted `dim D₀`.
pub fn scrambled_hyperbolic(rng: &mut ChaCha8Rng, f: Field) -> (FilteredSpace, Matrix, Matrix, usize) {
    let d = rng.gen_range(1..5);
    let n = 2 * d;
    let phi = Matrix::zeros(f, d, d)
        .hstack(&Matrix::identity(f, d))
        .and_then(|top| top.vstack(&Matrix::identity(f, d).hstack(&Matrix::zeros(f, d, d))?))
        .expect("square blocks");
    let mut flags = Vec::new();
    let mut k = d;
    loop {
        flags.push(Matrix::identity(f, n).submatrix(0, n, n - k, n));
        if k == 0 {
            break;
        }
        k -= rng.gen_range(1..=k);
    }
    let base = FilteredSpace::new(f, n, flags).expect("nested coordinate flags");
    let s = random::lower_triangular(rng, f, n);
    let s_inv = s.inverse().expect("invertible");
    let v = base.transform(&s).expect("invertible transform");
    let phi_s = s_inv.transpose().mul(&phi).and_then(|x| x.mul(&s_inv)).expect("square");
    let l = v.flag(1).clone();
    (v, phi_s, l, d)
}

fn law_self_dual(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..50 {
        let (v, phi, l, d) = scrambled_hyperbolic(rng, fields(t));
        let out = self_dual_decompose(&v, &phi, &l).map_err(e)?;
        let kd = out.k.hstack(&out.d).map_err(e)?;
        check(out.split_coordinates.mul(&kd).map_err(e)?.is_identity(), || format!("instance {t}: split coordinates"))?;
        check(out.pairing.mul(&out.section).map_err(e)?.is_identity(), || format!("instance {t}: pairing section"))?;
        check(out.d.cols() == d, || format!("instance {t}: recovered dim {} != planted {d}", out.d.cols()))?;
    }
    Ok(50)
}

/// Random `(B, A, f, k)` where `f` vanishes on `A ∩ U_k`.
pub fn random_hahn_banach(rng: &mut ChaCha8Rng, f: Field) -> (FilteredSpace, Matrix, Matrix, usize) {
    let n = rng.gen_range(1..=10);
    let b = random::filtered_space(rng, f, n, 6);
    let dim_a = rng.gen_range(0..=n);
    let a = random::subspace(rng, f, n, dim_a);
    let k = rng.gen_range(1..=b.num_flags());
    let q = duality::quotient_map(b.flag(k)).expect("valid flag");
    let h = random::matrix(rng, f, 1, q.rows()).mul(&q).expect("shapes");
    let fa = h.mul(&a).expect("shapes");
    (b, a, fa, k)
}

fn law_extend(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..200 {
        let (b, a, fa, k) = random_hahn_banach(rng, fields(t));
        let g = extend_functional(&b, &a, &fa, k).map_err(e)?;
        check(g.mul(&a).map_err(e)? == fa, || format!("instance {t}: extension does not restrict to f"))?;
        check(g.mul(b.flag(k)).map_err(e)?.is_zero(), || format!("instance {t}: extension does not kill U_{k}"))?;
    }
    Ok(200)
}

// tensor

fn law_sym_assoc(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..60 {
        let f = fields(t);
        let depth = rng.gen_range(1..=4);
        let (a, b, c) = (random::tower(rng, f, depth, 3), random::tower(rng, f, depth, 3), random::tower(rng, f, depth, 3));
        let ab = tensor::tensor_star_towers(&a, &b).map_err(e)?.materialize(depth).map_err(e)?;
        let ba = tensor::tensor_star_towers(&b, &a).map_err(e)?.materialize(depth).map_err(e)?;
        let abc1 = tensor::tensor_star_towers(&tensor::tensor_star_towers(&a, &b).map_err(e)?, &c).map_err(e)?.materialize(depth).map_err(e)?;
        let abc2 = tensor::tensor_star_towers(&a, &tensor::tensor_star_towers(&b, &c).map_err(e)?).map_err(e)?.materialize(depth).map_err(e)?;
        let (pa, pb, pc) = (a.materialize(depth).map_err(e)?, b.materialize(depth).map_err(e)?, c.materialize(depth).map_err(e)?);
        for n in 0..depth {
            let s = swap_permutation(f, pa.dims[n], pb.dims[n]);
            let asc = associator_permutation(f, pa.dims[n], pb.dims[n], pc.dims[n]);
            if n > 0 {
                let s_hi = s.clone();
                let s_lo = swap_permutation(f, pa.dims[n - 1], pb.dims[n - 1]);
                // Inverse system: transition maps level n to n - 1.
                check(s_lo.mul(&ab.transitions[n - 1]).map_err(e)? == ba.transitions[n - 1].mul(&s_hi).map_err(e)?, || format!("instance {t}: swap does not intertwine level {n}"))?;
                let a_lo = associator_permutation(f, pa.dims[n - 1], pb.dims[n - 1], pc.dims[n - 1]);
                check(a_lo.mul(&abc1.transitions[n - 1]).map_err(e)? == abc2.transitions[n - 1].mul(&asc).map_err(e)?, || format!("instance {t}: associator does not intertwine level {n}"))?;
            }
            check(s.rows() == ab.dims[n] && asc.rows() == abc1.dims[n], || format!("instance {t}: permutation sizes"))?;
        }
    }
    Ok(60)
}

fn law_unit(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..60 {
        let f = fields(t);
        let depth = rng.gen_range(1..=5);
        let a = random::tower(rng, f, depth, 4);
        let b = random::indtower(rng, f, depth, 4);
        let pa = a.materialize(depth).map_err(e)?;
        let pb = b.materialize(depth).map_err(e)?;
        for (l, r) in [(Tower::constant(f, 1), a.clone()), (a.clone(), Tower::constant(f, 1))] {
            let p = tensor::tensor_star_towers(&l, &r).map_err(e)?.materialize(depth).map_err(e)?;
            check(p.dims == pa.dims && p.transitions == pa.transitions, || format!("instance {t}: k is not a unit for towers"))?;
        }
        for (l, r) in [(IndTower::constant(f, 1), b.clone()), (b.clone(), IndTower::constant(f, 1))] {
            let p = tensor::tensor_indtowers(&l, &r).map_err(e)?.materialize(depth).map_err(e)?;
            check(p.dims == pb.dims && p.transitions == pb.transitions, || format!("instance {t}: k is not a unit for ind-towers"))?;
        }
        let x = IndLCObj::new(f, Seq::finite(vec![a.clone()]));
        let one = IndLCObj::new(f, Seq::finite(vec![Tower::constant(f, 1)]));
        let star = tensor::tensor_star_indlc(&x, &one).map_err(e)?.materialize(1, depth).map_err(e)?;
        check(star == x.materialize(1, depth).map_err(e)?, || format!("instance {t}: k is not a unit for ⊗*"))?;
        let y = ProDiscObj::new(f, Seq::finite(vec![b.clone()]));
        let one = ProDiscObj::new(f, Seq::finite(vec![IndTower::constant(f, 1)]));
        let bang = tensor::tensor_bang_prodisc(&one, &y).map_err(e)?.materialize(1, depth).map_err(e)?;
        check(bang == y.materialize(1, depth).map_err(e)?, || format!("instance {t}: k is not a unit for ⊗!"))?;
    }
    Ok(60)
}

fn law_mixed(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..60 {
        let f = fields(t);
        let depth = rng.gen_range(1..=4);
        let ps: Vec<_> = (0..3).map(|_| random::tower(rng, f, depth, 3).materialize(depth)).collect::<Result<_, _>>().map_err(e)?;
        let maps = tensor::mixed_comparison(&ps[0], &ps[1], &ps[2]).map_err(|err| format!("instance {t}: {err}"))?;
        check(maps.len() == depth, || format!("instance {t}: comparison missing levels"))?;
    }
    Ok(60)
}

fn law_curry(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..200 {
        let f = fields(t);
        let (a, b, c) = (rng.gen_range(0..=4), rng.gen_range(0..=4), rng.gen_range(0..=4));
        let m = random::matrix(rng, f, c, a * b);
        let cm = curry(&m, a, b);
        check(cm.rows() * cm.cols() == m.rows() * m.cols(), || format!("instance {t}: currying changes dimension"))?;
        check(uncurry(&cm, b, c) == m, || format!("instance {t}: uncurry ∘ curry != id"))?;
        check(curry(&uncurry(&cm, b, c), a, b) == cm, || format!("instance {t}: curry ∘ uncurry != id"))?;
    }
    Ok(200)
}

fn law_hom(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..40 {
        let f = fields(t);
        let depth = rng.gen_range(1..=3);
        let a = random::tate(rng, f, depth, 3);
        let b = random::tate(rng, f, depth, 3);
        tensor::hom_via_tensor(&a, &b, 3).map_err(|err| format!("instance {t}: {err}"))?;
    }
    Ok(40)
}

// splitting

fn law_split(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..100 {
        let f = fields(t);
        let n = rng.gen_range(1..=12);
        let b = random::filtered_space(rng, f, n, 6);
        let dim_a = rng.gen_range(0..=n);
        let a = random::subspace(rng, f, n, dim_a);
        let cert = split_filtered_ses(&b, &a).map_err(e)?;
        check(cert.pi.mul(&a).map_err(e)?.is_identity(), || format!("instance {t}: π∘i != id"))?;
        for (k, u) in b.flags().iter().enumerate() {
            let meet = exactla::intersect(&a, u).map_err(e)?;
            let img = a.mul(&cert.pi.mul(u).map_err(e)?).map_err(e)?;
            check(exactla::span_contains(&meet, &img).map_err(e)?, || format!("instance {t}: π(U_{}) ⊄ A∩U_{}", k + 1, k + 1))?;
        }
    }
    Ok(100)
}

/// The worked GF(2) ladder: both rows `k -> k² -> k`, `g = [[1,1],[0,1]]`.
pub fn worked_ladder() -> (Ladder, Matrix) {
    let f = gf(2);
    let row = ShortExact {
        i: Matrix::from_rows(f, &[[1], [0]]),
        p: Matrix::from_rows(f, &[[0, 1]]),
    };
    let ladder = Ladder {
        top: row.clone(),
        bottom: row,
        f: Matrix::identity(f, 1),
        g: Matrix::from_rows(f, &[[1, 1], [0, 1]]),
        h: Matrix::identity(f, 1),
    };
    (ladder, Matrix::from_rows(f, &[[1, 0]]))
}

fn law_lift(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let (ladder, pi1) = worked_ladder();
    let out = lift_splitting(&ladder, &pi1).map_err(e)?;
    check(out.pi2 == Matrix::from_rows(gf(2), &[[1, 1]]), || "worked instance: pi2 != [1, 1]".into())?;
    let mut count = 1;
    let mut t = 0;
    while count <= 100 {
        t += 1;
        let f = fields(t);
        let (a2, c2) = (rng.gen_range(1..4), rng.gen_range(0..3));
        let (a1, c1) = (rng.gen_range(0..=a2), rng.gen_range(0..=c2));
        let fa = random::matrix(rng, f, a1, a2);
        if fa.rank() != a1 {
            continue;
        }
        let hc = random::matrix(rng, f, c1, c2);
        let cross = random::matrix(rng, f, a1, c2);
        let std_row = |a: usize, c: usize| ShortExact {
            i: Matrix::identity(f, a + c).submatrix(0, a + c, 0, a),
            p: Matrix::identity(f, a + c).submatrix(a, a + c, 0, a + c),
        };
        // Scramble both middle terms so the complements are not coordinate.
        let (s1, s2) = (random::invertible(rng, f, a1 + c1), random::invertible(rng, f, a2 + c2));
        let (s1i, s2i) = (s1.inverse().map_err(e)?, s2.inverse().map_err(e)?);
        let g0 = fa.hstack(&cross).map_err(e)?.vstack(&Matrix::zeros(f, c1, a2).hstack(&hc).map_err(e)?).map_err(e)?;
        let (r1, r2) = (std_row(a1, c1), std_row(a2, c2));
        let top = ShortExact {
            i: s1.mul(&r1.i).map_err(e)?,
            p: r1.p.mul(&s1i).map_err(e)?,
        };
        let bottom = ShortExact {
            i: s2.mul(&r2.i).map_err(e)?,
            p: r2.p.mul(&s2i).map_err(e)?,
        };
        let g = s1.mul(&g0).map_err(e)?.mul(&s2i).map_err(e)?;
        let pi1 = Matrix::identity(f, a1).hstack(&random::matrix(rng, f, a1, c1)).map_err(e)?.mul(&s1i).map_err(e)?;
        let ladder = Ladder {
            top: top.clone(),
            bottom: bottom.clone(),
            f: fa.clone(),
            g: g.clone(),
            h: hc.clone(),
        };
        let out = lift_splitting(&ladder, &pi1).map_err(|err| format!("instance {t}: {err}"))?;
        check(fa.mul(&out.pi2).map_err(e)? == pi1.mul(&g).map_err(e)?, || format!("instance {t}: f∘pi2 != pi1∘g"))?;
        check(out.pi2.mul(&bottom.i).map_err(e)?.is_identity(), || format!("instance {t}: pi2 not a retraction"))?;
        check(bottom.p.mul(&out.s2).map_err(e)?.is_identity() && out.pi2.mul(&out.s2).map_err(e)?.is_zero(), || format!("instance {t}: s2 not the matching section"))?;
        check(g.mul(&out.s2).map_err(e)? == out.s1.mul(&hc).map_err(e)?, || format!("instance {t}: g∘s2 != s1∘h"))?;
        count += 1;
    }
    Ok(count)
}

fn law_complement_split(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..100 {
        let f = fields(t);
        let n = rng.gen_range(1..=12);
        let b = random::filtered_space(rng, f, n, 6);
        let dim_a = rng.gen_range(0..=n);
        let a = random::subspace(rng, f, n, dim_a);
        let c = topological_complement(&b, &a).map_err(e)?;
        check(a.rank() + c.complement.rank() == n, || format!("instance {t}: ranks do not add up"))?;
        check(exactla::intersect(&a, &c.complement).map_err(e)?.cols() == 0, || format!("instance {t}: A ∩ S != 0"))?;
    }
    Ok(100)
}

fn truncated_power_series(f: Field, n: usize) -> FilteredSpace {
    let id = Matrix::identity(f, n);
    FilteredSpace::new(f, n, (1..=n).map(|j| id.submatrix(0, n, j, n)).collect()).expect("nested")
}

/// Identity maps from discrete to compact truncations of `k[[t]]`, depths
/// `2..=max`: a continuous bijection whose inverse is not continuous.
pub fn open_mapping_fixture(f: Field, max: usize) -> Vec<MapTruncation> {
    (2..=max)
        .map(|n| MapTruncation {
            src: FilteredSpace::new(f, n, vec![Matrix::zeros(f, n, 0)]).expect("single zero flag"),
            dst: truncated_power_series(f, n),
            map: Matrix::identity(f, n),
        })
        .collect()
}

fn law_guard(_rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let f = gf(2);
    check(isomorphism_certificate(&open_mapping_fixture(f, 6)).is_err(), || "discrete -> compact identity was certified".into())?;
    let fine: Vec<MapTruncation> = (2..=6)
        .map(|n| MapTruncation {
            src: truncated_power_series(f, n),
            dst: truncated_power_series(f, n),
            map: Matrix::identity(f, n),
        })
        .collect();
    isomorphism_certificate(&fine).map_err(|err| format!("compact identity refused: {err}"))?;
    Ok(2)
}

// bidirected

fn grid_instances(rng: &mut ChaCha8Rng, count: usize, mut f: impl FnMut(usize, &gen::PlantedGrid) -> Result<(), String>) -> Result<usize, String> {
    for t in 0..count {
        let p = gen::random_planted_grid(rng, fields(t), 6, 8);
        f(t, &p)?;
    }
    Ok(count)
}

fn law_split_grid(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    grid_instances(rng, 50, |t, p| {
        let cob = split_grid(&p.grid, &p.witness).map_err(|err| format!("instance {t}: {err}"))?;
        verify_split(&p.grid, &p.witness, &cob).map_err(|err| format!("instance {t}: {err}"))
    })
}

fn law_recover(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    grid_instances(rng, 100, |t, p| {
        let cob = split_grid(&p.grid, &p.witness).map_err(|err| format!("instance {t}: {err}"))?;
        let dec = rfh_decompose(&p.grid, &p.witness, &cob).map_err(|err| format!("instance {t}: {err}"))?;
        let tp = dec.tate.materialize(p.grid.m.max(p.grid.n)).map_err(e)?;
        check(tp.d_lattice.dims == p.truth.v_dims && tp.c_lattice.dims == p.truth.w_dims, || format!("instance {t}: recovered profiles differ from planted"))
    })
}

fn law_grid_duality(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    grid_instances(rng, 50, |t, p| check_dual_decomposition(&p.grid, &p.witness).map_err(|err| format!("instance {t}: {err}")))
}

fn law_kappa(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    grid_instances(rng, 50, |t, p| {
        let cob = split_grid(&p.grid, &p.witness).map_err(e)?;
        let k = kappa_check(&p.grid, &p.witness, &cob).map_err(|err| format!("instance {t}: {err}"))?;
        check(k.normal_form.is_identity(), || format!("instance {t}: κ not the identity"))
    })
}

fn law_opens(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    grid_instances(rng, 50, |t, p| {
        let cob = split_grid(&p.grid, &p.witness).map_err(e)?;
        let dec = rfh_decompose(&p.grid, &p.witness, &cob).map_err(e)?;
        for r in 0..p.grid.m {
            check(dec.pi[r].mul(&dec.iota[r]).map_err(e)?.is_zero(), || format!("instance {t}: π∘ι != 0 at row {}", r + 1))?;
            check(exactla::same_span(&exactla::image(&dec.iota[r]), &dec.opens[r]).map_err(e)?, || format!("instance {t}: im ι != ker π at row {}", r + 1))?;
            if r > 0 {
                check(dec.opens[r].cols() <= dec.opens[r - 1].cols(), || format!("instance {t}: dim U increases at row {}", r + 1))?;
            }
        }
        Ok(())
    })
}

fn law_pairings(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for t in 0..25 {
        let f = fields(t);
        let (m, n) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let p = gen::planted_product(rng, f, m, n, 6);
        let cob = split_grid(&p.planted.grid, &p.planted.witness).map_err(e)?;
        let rep = assemble_product(&p.planted.grid, &p.planted.witness, &cob, &p.family).map_err(e)?;
        check(rep.is_ok() && rep.induced.iter().all(|l| l.matrix == p.nu), || format!("instance {t}: product not recovered"))?;
        let q = gen::planted_coproduct(rng, f, m, n, 6);
        let cob = split_grid(&q.planted.grid, &q.planted.witness).map_err(e)?;
        let rep = assemble_coproduct(&q.planted.grid, &q.planted.witness, &cob, &q.family).map_err(e)?;
        check(rep.is_ok() && rep.induced.iter().all(|l| l.matrix == q.nu), || format!("instance {t}: coproduct not recovered"))?;
        // Redraw until some cell is nonzero so one entry can be corrupted.
        let (d, bad, cell) = loop {
            let d = gen::planted_pd(rng, f, m, n, 6);
            let mut bad = d.mu.clone();
            if let Some(cell) = gen::corrupt_family(rng, &mut bad) {
                break (d, bad, cell);
            }
        };
        let rep = check_pd_intertwine(&d.planted.grid, &d.planted.witness, &d.mu, &d.lambda, &d.pd).map_err(e)?;
        check(rep.is_ok(), || format!("instance {t}: planted duality not intertwined"))?;
        let rep = check_pd_intertwine(&d.planted.grid, &d.planted.witness, &bad, &d.lambda, &d.pd).map_err(e)?;
        check(rep.violations.iter().any(|v| v.kind == "pd-intertwine" && v.cell == cell), || format!("instance {t}: corruption at {cell:?} not localized"))?;
    }
    Ok(25)
}

macro_rules! law {
    ($id:literal, $module:literal, $statement:literal, $run:expr) => {
        Law {
            id: $id,
            module: $module,
            statement: $statement,
            run: $run,
        }
    };
}

/// Every law, one per documented invariant, in a fixed order.
pub fn all_laws() -> Vec<Law> {
    vec![
        law!("solve", "exactla", "solve_linear returns X with MX = B on consistent systems over GF(2, 3, 5, 101)", law_solve),
        law!("kernel-image", "exactla", "M·kernel = 0 and rank(kernel) + rank(image) = cols", law_kernel_image),
        law!("complement", "exactla", "complement is deterministic and completes S to the ambient space", law_complement),
        law!("kron", "exactla", "kron(A1A2, B1B2) = kron(A1, B1)·kron(A2, B2)", law_kron),
        law!("truncation", "spaces", "materialize(N) truncated to N' equals materialize(N')", law_truncation),
        law!("normalize", "spaces", "normalized ind-towers have injective transitions and the same top level", law_normalize),
        law!("lattice-pair", "spaces", "complementary pairs are simultaneously c- and d-lattices", law_lattice_pair),
        law!("tate-verdict", "spaces", "power series is Tate; verdicts never flip between tate and not-tate with depth", law_tate_verdict),
        law!("involution", "duality", "dual(dual(X)) = X levelwise for every object kind", law_involution),
        law!("contravariance", "duality", "dual(h∘g) = dual(g)∘dual(h)", law_contravariance),
        law!("invertible-dual", "duality", "a map is invertible iff its dual is", law_invertible_dual),
        law!("self-dual", "duality", "self_dual_decompose certificates multiply out and recover the planted dimension", law_self_dual),
        law!("extend-functional", "duality", "extensions restrict to f and kill the witness flag", law_extend),
        law!("sym-assoc", "tensor", "swap and associator permutations intertwine the tensor towers", law_sym_assoc),
        law!("unit", "tensor", "constant k is a two-sided unit for both tensor products", law_unit),
        law!("mixed", "tensor", "the mixed comparison exists and commutes with transitions", law_mixed),
        law!("curry", "tensor", "curry and uncurry are inverse dimension-preserving bijections", law_curry),
        law!("hom", "tensor", "hom_via_tensor evaluations are injective and intertwine transitions", law_hom),
        law!("split", "splitting", "π∘i = id and π(U_k) ⊆ A∩U_k for random filtered pairs", law_split),
        law!("lift", "splitting", "lifted splittings commute with the ladder, including the worked GF(2) case", law_lift),
        law!("complement-split", "splitting", "topological complements are complements", law_complement_split),
        law!("open-mapping-guard", "splitting", "a continuous bijection with discontinuous inverse gets no isomorphism certificate", law_guard),
        law!("split-grid", "bidirected", "conjugated grid maps are exactly f ⊕ 1 and 1 ⊕ g", law_split_grid),
        law!("recover", "bidirected", "scrambled planted grids recover their V and W profiles", law_recover),
        law!("grid-duality", "bidirected", "decomposing the dual grid gives the dual decomposition", law_grid_duality),
        law!("kappa", "bidirected", "κ is the identity in normal-form coordinates", law_kappa),
        law!("opens", "bidirected", "dim U_r is nonincreasing and im ι_r = ker π_r", law_opens),
    ]
}

fn pairing_law() -> Law {
    law!("pairings", "bidirected", "planted products, coproducts and dualities are recovered; corruptions are localized", law_pairings)
}

pub fn laws_for(suite: Suite) -> Vec<Law> {
    match suite {
        Suite::Laws => all_laws(),
        Suite::Grid => {
            let mut v: Vec<Law> = all_laws().into_iter().filter(|l| l.module == "bidirected").collect();
            v.push(pairing_law());
            v
        }
        Suite::Appendix => all_laws()
            .into_iter()
            .filter(|l| l.module == "splitting" || matches!(l.id, "self-dual" | "extend-functional"))
            .collect(),
    }
}

/// Per-law seed: independent of which other laws run.
fn law_seed(seed: u64, id: &str) -> u64 {
    id.bytes().fold(seed ^ 0x9e37_79b9_7f4a_7c15, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Runs the laws of a suite on separate threads; results come back in the
/// fixed law order.
pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let laws = laws_for(suite);
    let laws: Vec<LawResult> = std::thread::scope(|s| {
        let handles: Vec<_> = laws
            .iter()
            .map(|law| {
                s.spawn(move || {
                    let mut rng = random::rng(law_seed(seed, law.id));
                    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| (law.run)(&mut rng)));
                    let (instances, passed, detail) = match outcome {
                        Ok(Ok(n)) => (n, true, String::new()),
                        Ok(Err(msg)) => (0, false, msg),
                        Err(_) => (0, false, "panicked".to_string()),
                    };
                    LawResult {
                        id: law.id,
                        module: law.module,
                        statement: law.statement,
                        instances,
                        passed,
                        detail,
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("law thread")).collect()
    });
    SuiteReport {
        suite,
        seed,
        passed: laws.iter().all(|l| l.passed),
        laws,
    }
}
