//! Presentations of linearly topologized spaces as systems of
//! finite-dimensional GF(p) spaces.
//!
//! A linearly compact space with countable basis is modelled by a [`Tower`]
//! (an inverse system `W_1 <- W_2 <- ...`), a discrete space of countable
//! dimension by an [`IndTower`] (a direct system `V_1 -> V_2 -> ...`).
//! Levels are produced lazily by a pure level function and memoized, so an
//! object like `k[[t]]` can be materialized to any finite depth. What happens
//! beyond the computed prefix is declared by a [`TailDescriptor`].

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactla::{self, Field, LinAlgError, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error("level {level}: {quantity} dimension {found} exceeds declared bound {bound}")]
    DescriptorViolation {
        level: usize,
        quantity: &'static str,
        found: usize,
        bound: usize,
    },
    #[error("requested depth {requested} but the presentation only has {extent} levels")]
    BeyondExtent { requested: usize, extent: usize },
    #[error("level {level}: transition has shape {found:?}, expected {expected:?}")]
    BadShape {
        level: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("unknown builtin space `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid filtration: {0}")]
    BadFlags(String),
    #[error("columns do not form a subspace basis (dependent or wrong ambient dimension)")]
    NotSubspace,
    #[error("sequence index {index} out of range (length {len})")]
    SeqIndex { index: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, SpaceError>;

/// A finite-dimensional discrete space `k^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinVect {
    pub dim: usize,
}

/// A linear map between finite-dimensional spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinMap {
    src: FinVect,
    dst: FinVect,
    mat: Matrix,
}

impl LinMap {
    pub fn new(src: FinVect, dst: FinVect, mat: Matrix) -> Result<Self> {
        if mat.shape() != (dst.dim, src.dim) {
            return Err(SpaceError::BadShape {
                level: 0,
                expected: (dst.dim, src.dim),
                found: mat.shape(),
            });
        }
        Ok(Self { src, dst, mat })
    }

    pub fn from_matrix(mat: Matrix) -> Self {
        Self {
            src: FinVect { dim: mat.cols() },
            dst: FinVect { dim: mat.rows() },
            mat,
        }
    }

    pub fn src(&self) -> FinVect {
        self.src
    }

    pub fn dst(&self) -> FinVect {
        self.dst
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinMap) -> Result<LinMap> {
        Ok(LinMap::from_matrix(self.mat.mul(&other.mat)?))
    }
}

/// Declared behaviour of a system beyond its materialized prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailDescriptor {
    /// Transitions are eventually isomorphisms; an explicit prefix is
    /// extended by repeating its last level with identity transitions.
    Stabilizing,
    /// Every transition has kernel of dimension at most `c`.
    BoundedKer(usize),
    /// Every transition has cokernel of dimension at most `c`.
    BoundedCoker(usize),
    Unbounded,
    Unspecified,
}

impl TailDescriptor {
    pub fn kind_name(self) -> &'static str {
        match self {
            Self::Stabilizing => "stabilizing",
            Self::BoundedKer(_) => "bounded-ker",
            Self::BoundedCoker(_) => "bounded-coker",
            Self::Unbounded => "unbounded",
            Self::Unspecified => "unspecified",
        }
    }

    pub fn bound(self) -> Option<usize> {
        match self {
            Self::BoundedKer(c) | Self::BoundedCoker(c) => Some(c),
            _ => None,
        }
    }

    /// Descriptor of the transposed system: kernels and cokernels swap.
    pub fn dual(self) -> Self {
        match self {
            Self::BoundedKer(c) => Self::BoundedCoker(c),
            Self::BoundedCoker(c) => Self::BoundedKer(c),
            other => other,
        }
    }

    fn check(self, level: usize, link: &Matrix) -> Result<()> {
        let rank = link.rank();
        let (quantity, found, bound) = match self {
            Self::BoundedKer(c) => ("kernel", link.cols() - rank, c),
            Self::BoundedCoker(c) => ("cokernel", link.rows() - rank, c),
            _ => return Ok(()),
        };
        if found > bound {
            return Err(SpaceError::DescriptorViolation {
                level,
                quantity,
                found,
                bound,
            });
        }
        Ok(())
    }
}

/// Orientation of a system's transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `W_{i+1} -> W_i`.
    Inverse,
    /// `V_i -> V_{i+1}`.
    Direct,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Self::Inverse => Self::Direct,
            Self::Direct => Self::Inverse,
        }
    }
}

/// One level of a system: its dimension and the transition linking it to the
/// previous level (absent at level 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub dim: usize,
    pub link: Option<Matrix>,
}

/// An explicit finite prefix of a system.
///
/// `transitions[i]` connects levels `i` and `i + 1`: for an inverse system
/// it maps level `i + 1` to level `i`, for a direct system level `i` to
/// level `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub field: Field,
    pub direction: Direction,
    pub dims: Vec<usize>,
    pub transitions: Vec<Matrix>,
    pub tail: TailDescriptor,
}

impl Presentation {
    pub fn depth(&self) -> usize {
        self.dims.len()
    }

    /// The first `depth` levels.
    pub fn truncate(&self, depth: usize) -> Presentation {
        let depth = depth.min(self.dims.len());
        Presentation {
            field: self.field,
            direction: self.direction,
            dims: self.dims[..depth].to_vec(),
            transitions: self.transitions[..depth.saturating_sub(1)].to_vec(),
            tail: self.tail,
        }
    }

    /// Kernel dimensions of the transitions.
    pub fn kernel_dims(&self) -> Vec<usize> {
        self.transitions.iter().map(|t| t.cols() - t.rank()).collect()
    }

    /// Cokernel dimensions of the transitions.
    pub fn cokernel_dims(&self) -> Vec<usize> {
        self.transitions.iter().map(|t| t.rows() - t.rank()).collect()
    }

    /// Composite transition between levels `from` and `to`, oriented along
    /// the system (for inverse systems `from >= to`, for direct `from <= to`).
    pub fn composite(&self, from: usize, to: usize) -> Result<Matrix> {
        let mut acc = Matrix::identity(self.field, self.dims[from]);
        match self.direction {
            Direction::Inverse => {
                assert!(from >= to);
                for i in (to..from).rev() {
                    acc = self.transitions[i].mul(&acc)?;
                }
            }
            Direction::Direct => {
                assert!(from <= to);
                for i in from..to {
                    acc = self.transitions[i].mul(&acc)?;
                }
            }
        }
        Ok(acc)
    }
}

type LevelFn = dyn Fn(usize) -> Result<Stage> + Send + Sync;

/// Lazily evaluated system of finite-dimensional spaces.
#[derive(Clone)]
struct System {
    field: Field,
    direction: Direction,
    tail: TailDescriptor,
    extent: Option<usize>,
    /// Every link at this level or deeper is an identity, when known.
    stable_from: Option<usize>,
    level_fn: Arc<LevelFn>,
    memo: Arc<RwLock<Vec<Stage>>>,
}

impl System {
    fn from_fn(
        field: Field,
        direction: Direction,
        tail: TailDescriptor,
        extent: Option<usize>,
        f: impl Fn(usize) -> Result<Stage> + Send + Sync + 'static,
    ) -> Self {
        Self {
            field,
            direction,
            tail,
            extent,
            stable_from: None,
            level_fn: Arc::new(f),
            memo: Arc::new(RwLock::new(Vec::new())),
        }
    }

    fn explicit(field: Field, direction: Direction, dims: Vec<usize>, transitions: Vec<Matrix>, tail: TailDescriptor) -> Result<Self> {
        if transitions.len() + 1 != dims.len() && !(dims.is_empty() && transitions.is_empty()) {
            return Err(SpaceError::BadShape {
                level: transitions.len(),
                expected: (dims.len().saturating_sub(1), 0),
                found: (transitions.len(), 0),
            });
        }
        for (i, t) in transitions.iter().enumerate() {
            let expected = match direction {
                Direction::Inverse => (dims[i], dims[i + 1]),
                Direction::Direct => (dims[i + 1], dims[i]),
            };
            if t.shape() != expected {
                return Err(SpaceError::BadShape {
                    level: i + 1,
                    expected,
                    found: t.shape(),
                });
            }
            if t.field() != field {
                return Err(LinAlgError::FieldMismatch {
                    left: field.p(),
                    right: t.field().p(),
                }
                .into());
            }
        }
        let len = dims.len();
        let extent = match tail {
            TailDescriptor::Stabilizing if len > 0 => None,
            _ => Some(len),
        };
        let dims = Arc::new(dims);
        let transitions = Arc::new(transitions);
        let mut sys = Self::from_fn(field, direction, tail, extent, move |i| {
            if i < len {
                Ok(Stage {
                    dim: dims[i],
                    link: if i == 0 { None } else { Some(transitions[i - 1].clone()) },
                })
            } else {
                let d = dims[len - 1];
                Ok(Stage {
                    dim: d,
                    link: Some(Matrix::identity(field, d)),
                })
            }
        });
        if extent.is_none() {
            sys.stable_from = Some(len);
        }
        Ok(sys)
    }

    fn level(&self, i: usize) -> Result<Stage> {
        if let Some(e) = self.extent {
            if i >= e {
                return Err(SpaceError::BeyondExtent {
                    requested: i + 1,
                    extent: e,
                });
            }
        }
        if let Some(s) = self.memo.read().expect("memo lock").get(i) {
            return Ok(s.clone());
        }
        let prev_dim = if i == 0 { None } else { Some(self.level(i - 1)?.dim) };
        let stage = (self.level_fn)(i)?;
        if let (Some(pd), Some(link)) = (prev_dim, &stage.link) {
            let expected = match self.direction {
                Direction::Inverse => (pd, stage.dim),
                Direction::Direct => (stage.dim, pd),
            };
            if link.shape() != expected {
                return Err(SpaceError::BadShape {
                    level: i,
                    expected,
                    found: link.shape(),
                });
            }
            self.tail.check(i, link)?;
        }
        let mut memo = self.memo.write().expect("memo lock");
        if memo.len() == i {
            memo.push(stage.clone());
        }
        Ok(stage)
    }

    fn materialize(&self, depth: usize) -> Result<Presentation> {
        if depth == 0 {
            return Err(SpaceError::ZeroDepth);
        }
        let mut dims = Vec::with_capacity(depth);
        let mut transitions = Vec::with_capacity(depth - 1);
        for i in 0..depth {
            let s = self.level(i)?;
            dims.push(s.dim);
            if let Some(l) = s.link {
                transitions.push(l);
            }
        }
        Ok(Presentation {
            field: self.field,
            direction: self.direction,
            dims,
            transitions,
            tail: self.tail,
        })
    }

    /// Same system with every transition transposed and direction flipped.
    fn transposed(&self) -> System {
        let inner = self.clone();
        let stable_from = self.stable_from;
        let mut sys = Self::from_fn(self.field, self.direction.flip(), self.tail.dual(), self.extent, move |i| {
            let s = inner.level(i)?;
            Ok(Stage {
                dim: s.dim,
                link: s.link.map(|m| m.transpose()),
            })
        });
        sys.stable_from = stable_from;
        sys
    }
}

macro_rules! system_newtype {
    ($name:ident, $dir:expr) => {
        #[derive(Clone)]
        pub struct $name(System);

        impl $name {
            /// Lazy system from a pure level function; `extent` bounds the
            /// number of available levels (`None` = unbounded).
            pub fn from_fn(
                field: Field,
                tail: TailDescriptor,
                extent: Option<usize>,
                f: impl Fn(usize) -> Result<Stage> + Send + Sync + 'static,
            ) -> Self {
                Self(System::from_fn(field, $dir, tail, extent, f))
            }

            /// Finite explicit prefix. With a stabilizing tail the last level
            /// repeats forever; otherwise the extent is the prefix length.
            pub fn explicit(field: Field, dims: Vec<usize>, transitions: Vec<Matrix>, tail: TailDescriptor) -> Result<Self> {
                Ok(Self(System::explicit(field, $dir, dims, transitions, tail)?))
            }

            pub fn from_presentation(p: &Presentation) -> Result<Self> {
                assert_eq!(p.direction, $dir, "presentation direction mismatch");
                Self::explicit(p.field, p.dims.clone(), p.transitions.clone(), p.tail)
            }

            /// `k^d` at every level with identity transitions.
            pub fn constant(field: Field, d: usize) -> Self {
                Self::from_fn(field, TailDescriptor::Stabilizing, None, move |i| {
                    Ok(Stage {
                        dim: d,
                        link: (i > 0).then(|| Matrix::identity(field, d)),
                    })
                })
                .stable_from_level(1)
            }

            /// Declares that every link at level `s` or deeper is an
            /// identity. Not checked beyond the levels actually evaluated.
            pub fn stable_from_level(mut self, s: usize) -> Self {
                self.0.stable_from = Some(s);
                self
            }

            /// Level from which all links are known to be identities.
            pub fn stable_from(&self) -> Option<usize> {
                self.0.stable_from
            }

            /// Number of levels that determine the whole system, if finite:
            /// the extent, or the prefix before the known stable tail.
            pub fn determining_depth(&self) -> Option<usize> {
                match (self.0.extent, self.0.stable_from) {
                    (Some(e), _) => Some(e),
                    (None, Some(s)) => Some(s.max(1)),
                    (None, None) => None,
                }
            }

            /// True when every level is known to be zero.
            pub fn is_known_zero(&self) -> Result<bool> {
                match self.determining_depth() {
                    Some(0) => Ok(true),
                    Some(d) => Ok(self.materialize(d)?.dims.iter().all(|&x| x == 0)),
                    None => Ok(false),
                }
            }

            pub fn zero(field: Field) -> Self {
                Self::constant(field, 0)
            }

            pub fn field(&self) -> Field {
                self.0.field
            }

            pub fn tail(&self) -> TailDescriptor {
                self.0.tail
            }

            /// Number of available levels, `None` when unbounded.
            pub fn extent(&self) -> Option<usize> {
                self.0.extent
            }

            /// Level `i` (0-based); memoized.
            pub fn level(&self, i: usize) -> Result<Stage> {
                self.0.level(i)
            }

            /// First `depth` levels with their transitions.
            pub fn materialize(&self, depth: usize) -> Result<Presentation> {
                self.0.materialize(depth)
            }

            /// All levels of a finite-extent system; `fallback` levels for
            /// unbounded ones.
            pub fn materialize_all(&self, fallback: usize) -> Result<Presentation> {
                self.0.materialize(self.0.extent.unwrap_or(fallback).max(1))
            }

            /// Depth clamped to the extent.
            pub fn clamp_depth(&self, depth: usize) -> usize {
                self.0.extent.map_or(depth, |e| depth.min(e))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_struct(stringify!($name))
                    .field("field", &self.0.field.p())
                    .field("tail", &self.0.tail)
                    .field("extent", &self.0.extent)
                    .field("memoized", &self.0.memo.read().map(|m| m.len()).unwrap_or(0))
                    .finish()
            }
        }
    };
}

system_newtype!(Tower, Direction::Inverse);
system_newtype!(IndTower, Direction::Direct);

impl Tower {
    /// Dual system: transposed transitions, same level dimensions.
    pub fn dual(&self) -> IndTower {
        IndTower(self.0.transposed())
    }
}

impl IndTower {
    pub fn dual(&self) -> Tower {
        Tower(self.0.transposed())
    }
}

/// A lazily evaluated, possibly infinite, memoized sequence.
pub struct Seq<T> {
    len: Option<usize>,
    gen: Arc<dyn Fn(usize) -> Result<T> + Send + Sync>,
    memo: Arc<RwLock<Vec<T>>>,
}

impl<T> Clone for Seq<T> {
    fn clone(&self) -> Self {
        Self {
            len: self.len,
            gen: self.gen.clone(),
            memo: self.memo.clone(),
        }
    }
}

impl<T: Clone + Send + Sync + 'static> Seq<T> {
    pub fn finite(items: Vec<T>) -> Self {
        let len = items.len();
        let items = Arc::new(items);
        let memo = Arc::new(RwLock::new(items.as_ref().clone()));
        Self {
            len: Some(len),
            gen: Arc::new(move |i| Ok(items[i].clone())),
            memo,
        }
    }

    pub fn lazy(len: Option<usize>, f: impl Fn(usize) -> Result<T> + Send + Sync + 'static) -> Self {
        Self {
            len,
            gen: Arc::new(f),
            memo: Arc::new(RwLock::new(Vec::new())),
        }
    }

    /// `None` for infinite sequences.
    pub fn len(&self) -> Option<usize> {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == Some(0)
    }

    pub fn get(&self, i: usize) -> Result<T> {
        if let Some(n) = self.len {
            if i >= n {
                return Err(SpaceError::SeqIndex { index: i, len: n });
            }
        }
        if let Some(x) = self.memo.read().expect("memo lock").get(i) {
            return Ok(x.clone());
        }
        // Fill sequentially so the memo stays a prefix.
        let start = self.memo.read().expect("memo lock").len();
        for j in start..=i {
            let item = (self.gen)(j)?;
            let mut memo = self.memo.write().expect("memo lock");
            if memo.len() == j {
                memo.push(item);
            }
        }
        Ok(self.memo.read().expect("memo lock")[i].clone())
    }

    /// The first `n` items (fewer if the sequence is shorter).
    pub fn take(&self, n: usize) -> Result<Vec<T>> {
        let n = self.len.map_or(n, |l| n.min(l));
        (0..n).map(|i| self.get(i)).collect()
    }

    pub fn map<U: Clone + Send + Sync + 'static>(&self, f: impl Fn(T) -> Result<U> + Send + Sync + 'static) -> Seq<U> {
        let src = self.clone();
        Seq::lazy(self.len, move |i| f(src.get(i)?))
    }
}

/// Normal form of a Tate space: a linearly compact c-lattice plus a
/// discrete complementary d-lattice.
#[derive(Clone, Debug)]
pub struct TateObj {
    pub c_lattice: Tower,
    pub d_lattice: IndTower,
}

/// Materialized prefixes of both lattices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TatePresentation {
    pub c_lattice: Presentation,
    pub d_lattice: Presentation,
}

impl TateObj {
    pub fn new(c_lattice: Tower, d_lattice: IndTower) -> Self {
        Self { c_lattice, d_lattice }
    }

    /// `k^n` viewed as a discrete Tate space.
    pub fn finite(field: Field, n: usize) -> Self {
        Self::new(Tower::zero(field), IndTower::constant(field, n))
    }

    pub fn field(&self) -> Field {
        self.c_lattice.field()
    }

    /// Both lattices to `depth`, each clamped to its own extent.
    pub fn materialize(&self, depth: usize) -> Result<TatePresentation> {
        Ok(TatePresentation {
            c_lattice: self.c_lattice.materialize(self.c_lattice.clamp_depth(depth))?,
            d_lattice: self.d_lattice.materialize(self.d_lattice.clamp_depth(depth))?,
        })
    }

    pub fn dual(&self) -> TateObj {
        TateObj::new(self.d_lattice.dual(), self.c_lattice.dual())
    }
}

/// Countable direct sum of linearly compact spaces.
#[derive(Clone)]
pub struct IndLCObj {
    pub field: Field,
    pub summands: Seq<Tower>,
}

/// Countable product of discrete spaces.
#[derive(Clone)]
pub struct ProDiscObj {
    pub field: Field,
    pub factors: Seq<IndTower>,
}

impl IndLCObj {
    pub fn new(field: Field, summands: Seq<Tower>) -> Self {
        Self { field, summands }
    }

    pub fn zero(field: Field) -> Self {
        Self::new(field, Seq::finite(Vec::new()))
    }

    /// First `depth` summands, each to `inner` levels (clamped to extent).
    pub fn materialize(&self, depth: usize, inner: usize) -> Result<Vec<Presentation>> {
        if depth == 0 || inner == 0 {
            return Err(SpaceError::ZeroDepth);
        }
        self.summands
            .take(depth)?
            .iter()
            .map(|t| t.materialize(t.clamp_depth(inner)))
            .collect()
    }

    pub fn dual(&self) -> ProDiscObj {
        ProDiscObj::new(self.field, self.summands.map(|t| Ok(t.dual())))
    }
}

impl ProDiscObj {
    pub fn new(field: Field, factors: Seq<IndTower>) -> Self {
        Self { field, factors }
    }

    pub fn zero(field: Field) -> Self {
        Self::new(field, Seq::finite(Vec::new()))
    }

    pub fn materialize(&self, depth: usize, inner: usize) -> Result<Vec<Presentation>> {
        if depth == 0 || inner == 0 {
            return Err(SpaceError::ZeroDepth);
        }
        self.factors
            .take(depth)?
            .iter()
            .map(|t| t.materialize(t.clamp_depth(inner)))
            .collect()
    }

    pub fn dual(&self) -> IndLCObj {
        IndLCObj::new(self.field, self.factors.map(|t| Ok(t.dual())))
    }
}

impl fmt::Debug for IndLCObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndLCObj").field("field", &self.field.p()).field("len", &self.summands.len()).finish()
    }
}

impl fmt::Debug for ProDiscObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProDiscObj").field("field", &self.field.p()).field("len", &self.factors.len()).finish()
    }
}

/// Any of the space kinds, for operations that accept several of them.
#[derive(Clone, Debug)]
pub enum SpaceObject {
    FinVect(FinVect),
    LinMap(LinMap),
    Tower(Tower),
    IndTower(IndTower),
    Tate(TateObj),
    IndLC(IndLCObj),
    ProDisc(ProDiscObj),
}

impl SpaceObject {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::FinVect(_) => "finvect",
            Self::LinMap(_) => "linmap",
            Self::Tower(_) => "tower",
            Self::IndTower(_) => "indtower",
            Self::Tate(_) => "tate",
            Self::IndLC(_) => "indlc",
            Self::ProDisc(_) => "prodisc",
        }
    }
}

impl From<Builtin> for SpaceObject {
    fn from(b: Builtin) -> Self {
        match b {
            Builtin::Tower(t) => Self::Tower(t),
            Builtin::IndTower(t) => Self::IndTower(t),
            Builtin::Tate(t) => Self::Tate(t),
            Builtin::FinVect(v) => Self::FinVect(v),
        }
    }
}

/// Finite-dimensional space with a nested chain of open subspaces
/// `U_1 ⊇ U_2 ⊇ ... ⊇ U_N = 0`, each given by basis columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredSpace {
    field: Field,
    ambient: usize,
    flags: Vec<Matrix>,
}

impl FilteredSpace {
    pub fn new(field: Field, ambient: usize, flags: Vec<Matrix>) -> Result<Self> {
        if flags.is_empty() {
            return Err(SpaceError::BadFlags("at least the zero flag is required".into()));
        }
        for (k, u) in flags.iter().enumerate() {
            if u.rows() != ambient || u.field() != field {
                return Err(SpaceError::BadFlags(format!("flag {} lives in the wrong space", k + 1)));
            }
            if u.rank() != u.cols() {
                return Err(SpaceError::BadFlags(format!("flag {} has dependent columns", k + 1)));
            }
            if k > 0 && !exactla::span_contains(&flags[k - 1], u)? {
                return Err(SpaceError::BadFlags(format!("flag {} is not contained in flag {}", k + 1, k)));
            }
        }
        if flags.last().is_some_and(|u| u.cols() != 0) {
            return Err(SpaceError::BadFlags("last flag must be zero".into()));
        }
        Ok(Self { field, ambient, flags })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn flags(&self) -> &[Matrix] {
        &self.flags
    }

    pub fn num_flags(&self) -> usize {
        self.flags.len()
    }

    /// Flag `U_k`, 1-based.
    pub fn flag(&self, k: usize) -> &Matrix {
        &self.flags[k - 1]
    }

    /// Checks that `s` is a basis of a subspace of the ambient space.
    pub fn check_subspace(&self, s: &Matrix) -> Result<()> {
        if s.rows() != self.ambient || s.field() != self.field || s.rank() != s.cols() {
            return Err(SpaceError::NotSubspace);
        }
        Ok(())
    }

    /// Applies an automorphism of the ambient space to every flag.
    pub fn transform(&self, g: &Matrix) -> Result<FilteredSpace> {
        let flags = self.flags.iter().map(|u| g.mul(u)).collect::<std::result::Result<Vec<_>, _>>()?;
        FilteredSpace::new(self.field, self.ambient, flags)
    }
}

/// Named example spaces with monomial bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinName {
    PowerSeries,
    Laurent,
    Polynomial,
    Constant(usize),
}

impl FromStr for BuiltinName {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power_series" | "powerseries" => Ok(Self::PowerSeries),
            "laurent" => Ok(Self::Laurent),
            "polynomial" => Ok(Self::Polynomial),
            _ => {
                if let Some(n) = s.strip_prefix("constant(").and_then(|r| r.strip_suffix(')')) {
                    if let Ok(n) = n.parse() {
                        return Ok(Self::Constant(n));
                    }
                }
                Err(SpaceError::UnknownBuiltin(s.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Builtin {
    Tower(Tower),
    IndTower(IndTower),
    Tate(TateObj),
    FinVect(FinVect),
}

/// `k[t]/t^n` at level `n - 1`, transitions dropping the top coefficient.
pub fn power_series(field: Field) -> Tower {
    Tower::from_fn(field, TailDescriptor::BoundedKer(1), None, move |i| {
        let n = i + 1;
        Ok(Stage {
            dim: n,
            link: (i > 0).then(|| Matrix::identity(field, n - 1).hstack(&Matrix::zeros(field, n - 1, 1)).expect("shapes")),
        })
    })
}

/// Polynomials of degree `< n` at level `n - 1`, with inclusions.
pub fn polynomial(field: Field) -> IndTower {
    IndTower::from_fn(field, TailDescriptor::BoundedCoker(1), None, move |i| {
        let n = i + 1;
        Ok(Stage {
            dim: n,
            link: (i > 0).then(|| Matrix::identity(field, n - 1).vstack(&Matrix::zeros(field, 1, n - 1)).expect("shapes")),
        })
    })
}

/// `k((t)) = k[[t]] ⊕ t^{-1} k[t^{-1}]`; the d-lattice at level `n - 1` has
/// basis `t^{-1}, ..., t^{-n}`.
pub fn laurent(field: Field) -> TateObj {
    TateObj::new(power_series(field), polynomial(field))
}

pub fn builtin_space(name: BuiltinName, field: Field) -> Builtin {
    match name {
        BuiltinName::PowerSeries => Builtin::Tower(power_series(field)),
        BuiltinName::Polynomial => Builtin::IndTower(polynomial(field)),
        BuiltinName::Laurent => Builtin::Tate(laurent(field)),
        BuiltinName::Constant(n) => Builtin::FinVect(FinVect { dim: n }),
    }
}

/// Normalized direct system together with its comparison data.
#[derive(Debug, Clone)]
pub struct NormalizedIndTower {
    /// Injective prefix: level `i` is the image of the original level `i`
    /// inside the top level.
    pub presentation: Presentation,
    /// Basis of each normalized level as columns in the top space.
    pub bases: Vec<Matrix>,
    /// Surjections from original level `i` onto normalized level `i`.
    pub comparisons: Vec<Matrix>,
}

/// Replaces each level by its image in the deepest materialized level so all
/// transitions become inclusions.
pub fn normalize_indtower(t: &IndTower, depth: usize) -> Result<NormalizedIndTower> {
    let p = t.materialize(depth)?;
    let top = depth - 1;
    let mut bases = Vec::with_capacity(depth);
    let mut comparisons = Vec::with_capacity(depth);
    for i in 0..depth {
        let to_top = p.composite(i, top)?;
        let basis = exactla::image(&to_top);
        let comp = exactla::solve_linear(&basis, &to_top)?.expect("image contains columns");
        bases.push(basis);
        comparisons.push(comp);
    }
    let mut transitions = Vec::with_capacity(depth - 1);
    for i in 0..top {
        let incl = exactla::solve_linear(&bases[i + 1], &bases[i])?.expect("images are nested");
        transitions.push(incl);
    }
    Ok(NormalizedIndTower {
        presentation: Presentation {
            field: p.field,
            direction: Direction::Direct,
            dims: bases.iter().map(Matrix::cols).collect(),
            transitions,
            tail: p.tail,
        },
        bases,
        comparisons,
    })
}

#[derive(Debug, Clone)]
pub struct NormalizedTower {
    /// Surjective prefix: level `i` is the image of the deepest level in the
    /// original level `i`.
    pub presentation: Presentation,
    /// Inclusion of each normalized level into the original level.
    pub inclusions: Vec<Matrix>,
}

/// Replaces each level by the eventual image (within the prefix) so all
/// transitions become surjective. Only valid relative to the prefix: deeper
/// levels may shrink images further unless the tail is stabilizing.
pub fn normalize_tower(t: &Tower, depth: usize) -> Result<NormalizedTower> {
    let p = t.materialize(depth)?;
    let bottom = depth - 1;
    let inclusions: Vec<Matrix> = (0..depth)
        .map(|i| Ok(exactla::image(&p.composite(bottom, i)?)))
        .collect::<Result<_>>()?;
    let mut transitions = Vec::with_capacity(bottom);
    for i in 0..bottom {
        let pushed = p.transitions[i].mul(&inclusions[i + 1])?;
        let restricted = exactla::solve_linear(&inclusions[i], &pushed)?.expect("image chain is compatible");
        transitions.push(restricted);
    }
    Ok(NormalizedTower {
        presentation: Presentation {
            field: p.field,
            direction: Direction::Inverse,
            dims: inclusions.iter().map(Matrix::cols).collect(),
            transitions,
            tail: p.tail,
        },
        inclusions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeMode {
    /// Open (contains some flag); boundedness is automatic in finite dimension.
    Compact,
    /// Meets some flag trivially; closedness is automatic in finite dimension.
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeVerdict {
    pub holds: bool,
    /// Smallest 1-based flag index witnessing the property.
    pub witness: Option<usize>,
    pub note: &'static str,
}

/// Checks whether `s` is a c-lattice (mode `Compact`) or d-lattice (mode
/// `Discrete`) of the truncated space. The terminal zero flag only counts as
/// an open subspace when it is the sole flag (a genuinely discrete space);
/// otherwise it is an artifact of truncation and every subspace would pass.
pub fn lattice_check(f: &FilteredSpace, s: &Matrix, mode: LatticeMode) -> Result<LatticeVerdict> {
    f.check_subspace(s)?;
    let candidates = if f.num_flags() == 1 { 1 } else { f.num_flags() - 1 };
    let witness = match mode {
        LatticeMode::Compact => {
            let mut w = None;
            for (k, u) in f.flags()[..candidates].iter().enumerate() {
                if exactla::span_contains(s, u)? {
                    w = Some(k + 1);
                    break;
                }
            }
            w
        }
        LatticeMode::Discrete => {
            let mut w = None;
            for (k, u) in f.flags()[..candidates].iter().enumerate() {
                if exactla::intersect(s, u)?.cols() == 0 {
                    w = Some(k + 1);
                    break;
                }
            }
            w
        }
    };
    let note = match mode {
        LatticeMode::Compact => "openness checked against flags; linear boundedness automatic in finite dimension",
        LatticeMode::Discrete => "discreteness checked against flags; closedness and coboundedness automatic in finite dimension",
    };
    Ok(LatticeVerdict {
        holds: witness.is_some(),
        witness,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Tate,
    NotTate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TateEvidence {
    pub dims: Vec<usize>,
    pub kernel_dims: Vec<usize>,
    pub cokernel_dims: Vec<usize>,
    pub tail: &'static str,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TateVerdict {
    pub verdict: Verdict,
    pub evidence: TateEvidence,
}

/// Reference to either kind of system, for functions accepting both.
#[derive(Clone, Copy)]
pub enum SystemRef<'a> {
    Tower(&'a Tower),
    IndTower(&'a IndTower),
}

impl SystemRef<'_> {
    fn materialize(&self, depth: usize) -> Result<Presentation> {
        match self {
            Self::Tower(t) => t.materialize(depth),
            Self::IndTower(t) => t.materialize(depth),
        }
    }
}

/// Decides whether the limit (for towers, via kernels) or colimit (for
/// ind-towers, via cokernels) is Tate, combining the prefix with the tail
/// descriptor. The verdict relies on the descriptor for everything beyond
/// the prefix, and the evidence says so.
pub fn is_tate_verdict(sys: SystemRef<'_>, depth: usize) -> Result<TateVerdict> {
    let p = sys.materialize(depth)?;
    let kernel_dims = p.kernel_dims();
    let cokernel_dims = p.cokernel_dims();
    let (relevant, relevant_name) = match p.direction {
        Direction::Inverse => (&kernel_dims, "kernel"),
        Direction::Direct => (&cokernel_dims, "cokernel"),
    };
    let (verdict, reason) = match (p.direction, p.tail) {
        (_, TailDescriptor::Stabilizing) => (
            Verdict::Tate,
            "declared stabilizing: transitions eventually isomorphisms, finite-dimensional increments".to_string(),
        ),
        (Direction::Inverse, TailDescriptor::BoundedKer(c)) | (Direction::Direct, TailDescriptor::BoundedCoker(c)) => (
            Verdict::Tate,
            format!("{relevant_name} dimensions bounded by declared c={c}; prefix consistent"),
        ),
        (_, TailDescriptor::BoundedKer(_)) | (_, TailDescriptor::BoundedCoker(_)) => (
            Verdict::Inconclusive,
            format!("declared bound does not constrain the {relevant_name} dimensions that decide Tate-ness"),
        ),
        (_, TailDescriptor::Unbounded) => {
            let nondecreasing = relevant.windows(2).all(|w| w[0] <= w[1]);
            let growing = relevant.last().is_some_and(|&d| d > 0);
            if nondecreasing && growing {
                (
                    Verdict::NotTate,
                    format!("declared unbounded; prefix {relevant_name} dimensions nondecreasing and nonzero"),
                )
            } else {
                (
                    Verdict::Inconclusive,
                    format!("declared unbounded but prefix {relevant_name} dimensions show no growth"),
                )
            }
        }
        (_, TailDescriptor::Unspecified) => (
            Verdict::Inconclusive,
            "no tail declared; a finite prefix cannot decide Tate-ness".to_string(),
        ),
    };
    Ok(TateVerdict {
        verdict,
        evidence: TateEvidence {
            dims: p.dims.clone(),
            kernel_dims,
            cokernel_dims,
            tail: p.tail.kind_name(),
            reason,
        },
    })
}
