//! JSON documents for matrices, space objects and grids.
//!
//! Parsing errors carry a JSON-pointer-like path (`/right/0/1/entries`) to
//! the offending value. Grid documents use 1-based cells for pairing
//! windows; everything else is positional.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::bidirected::{BidirectedGrid, PDWitness, PairingEntry, PairingFamily, PairingKind, SESWitness};
use crate::exactla::{Field, Matrix};
use crate::spaces::{self, BuiltinName, FinVect, IndLCObj, IndTower, LinMap, Presentation, ProDiscObj, Seq, SpaceObject, TailDescriptor, TateObj, Tower};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at {path}: {message}")]
pub struct JsonError {
    pub path: String,
    pub message: String,
}

impl JsonError {
    pub fn to_json(&self) -> Value {
        json!({"error": {"path": self.path, "message": self.message}})
    }
}

pub type Result<T> = std::result::Result<T, JsonError>;

#[derive(Clone, Copy)]
struct Cursor<'a> {
    value: &'a Value,
    path: &'a str,
}

fn at<'a>(value: &'a Value, path: &'a str) -> Cursor<'a> {
    Cursor { value, path }
}

fn fail<T>(path: &str, message: impl Into<String>) -> Result<T> {
    Err(JsonError {
        path: if path.is_empty() { "/".into() } else { path.into() },
        message: message.into(),
    })
}

fn join(path: &str, key: impl std::fmt::Display) -> String {
    format!("{path}/{key}")
}

impl<'a> Cursor<'a> {
    fn object(self) -> Result<&'a Map<String, Value>> {
        match self.value.as_object() {
            Some(m) => Ok(m),
            None => fail(self.path, "expected an object"),
        }
    }

    fn array(self) -> Result<&'a Vec<Value>> {
        match self.value.as_array() {
            Some(a) => Ok(a),
            None => fail(self.path, "expected an array"),
        }
    }

    fn usize(self) -> Result<usize> {
        match self.value.as_u64() {
            Some(x) => usize::try_from(x).or_else(|_| fail(self.path, "integer too large")),
            None => fail(self.path, "expected a non-negative integer"),
        }
    }

    fn str(self) -> Result<String> {
        match self.value.as_str() {
            Some(s) => Ok(s.to_string()),
            None => fail(self.path, "expected a string"),
        }
    }
}

/// Looks up `key`, calling `f` with the child value and its path.
fn req<T>(obj: Cursor<'_>, key: &str, f: impl FnOnce(Cursor<'_>) -> Result<T>) -> Result<T> {
    let map = obj.object()?;
    let path = join(obj.path, key);
    match map.get(key) {
        Some(v) => f(at(v, &path)),
        None => fail(obj.path, format!("missing key \"{key}\"")),
    }
}

fn opt_field<T>(obj: Cursor<'_>, key: &str, f: impl FnOnce(Cursor<'_>) -> Result<T>) -> Result<Option<T>> {
    let map = obj.object()?;
    let path = join(obj.path, key);
    match map.get(key) {
        Some(Value::Null) | None => Ok(None),
        Some(v) => f(at(v, &path)).map(Some),
    }
}

fn list<T>(c: Cursor<'_>, mut f: impl FnMut(Cursor<'_>) -> Result<T>) -> Result<Vec<T>> {
    c.array()?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let p = join(c.path, i);
            f(at(v, &p))
        })
        .collect()
}

fn grid_of<T>(c: Cursor<'_>, mut f: impl FnMut(Cursor<'_>) -> Result<T>) -> Result<Vec<Vec<T>>> {
    list(c, |row| list(row, &mut f))
}

fn parse_field(c: Cursor<'_>) -> Result<Field> {
    let p = c.usize()?;
    match u32::try_from(p).ok().and_then(|p| Field::new(p).ok()) {
        Some(f) => Ok(f),
        None => fail(c.path, format!("{p} is not a supported prime")),
    }
}

/// Reads `"field"` from a document if present, else uses `default`.
pub fn document_field(doc: &Value, default: Option<Field>) -> Result<Field> {
    let c = at(doc, "");
    match (opt_field(c, "field", parse_field)?, default) {
        (Some(f), _) | (None, Some(f)) => Ok(f),
        (None, None) => fail("/", "no field given in the document or on the command line"),
    }
}

fn matrix_at(c: Cursor<'_>, field: Field) -> Result<Matrix> {
    let rows = field_usize(c, "rows")?;
    let cols = field_usize(c, "cols")?;
    let entries = req(c, "entries", |e| {
        list(e, |x| match x.value.as_i64() {
            Some(v) => Ok(v),
            None => fail(x.path, "expected an integer"),
        })
    })?;
    if entries.len() != rows.saturating_mul(cols) {
        return fail(&join(c.path, "entries"), format!("expected {} entries for a {rows}x{cols} matrix, found {}", rows * cols, entries.len()));
    }
    Ok(Matrix::from_entries(field, rows, cols, &entries).expect("length checked"))
}

fn field_usize(c: Cursor<'_>, key: &str) -> Result<usize> {
    req(c, key, |x| x.usize())
}

pub fn parse_matrix(v: &Value, field: Field) -> Result<Matrix> {
    matrix_at(at(v, ""), field)
}

pub fn matrix_json(m: &Matrix) -> Value {
    serde_json::to_value(m).expect("matrix serializes")
}

fn tail_at(c: Cursor<'_>) -> Result<TailDescriptor> {
    let kind = req(c, "kind", |x| x.str())?;
    let kind = kind.as_str();
    Ok(match kind {
        "stabilizing" => TailDescriptor::Stabilizing,
        "bounded-ker" => TailDescriptor::BoundedKer(field_usize(c, "c")?),
        "bounded-coker" => TailDescriptor::BoundedCoker(field_usize(c, "c")?),
        "unbounded" => TailDescriptor::Unbounded,
        "unspecified" => TailDescriptor::Unspecified,
        other => return fail(&join(c.path, "kind"), format!("unknown tail kind \"{other}\"")),
    })
}

pub fn tail_json(t: TailDescriptor) -> Value {
    match t.bound() {
        Some(c) => json!({"kind": t.kind_name(), "c": c}),
        None => json!({"kind": t.kind_name()}),
    }
}

fn expect_kind(c: Cursor<'_>, want: &str) -> Result<()> {
    let kind = req(c, "kind", |x| x.str())?;
    let kind = kind.as_str();
    if kind != want {
        return fail(&join(c.path, "kind"), format!("expected kind \"{want}\", found \"{kind}\""));
    }
    Ok(())
}

fn system_parts(c: Cursor<'_>, field: Field) -> Result<(Vec<usize>, Vec<Matrix>, TailDescriptor)> {
    let dims = req(c, "dims", |d| list(d, |x| x.usize()))?;
    let transitions = req(c, "transitions", |t| list(t, |m| matrix_at(m, field)))?;
    let tail = opt_field(c, "tail", tail_at)?.unwrap_or(TailDescriptor::Unspecified);
    Ok((dims, transitions, tail))
}

fn space_error<T>(path: &str, e: spaces::SpaceError) -> Result<T> {
    fail(path, e.to_string())
}

fn tower_at(c: Cursor<'_>, field: Field) -> Result<Tower> {
    expect_kind(c, "tower")?;
    let (d, t, tail) = system_parts(c, field)?;
    Tower::explicit(field, d, t, tail).or_else(|e| space_error(c.path, e))
}

fn indtower_at(c: Cursor<'_>, field: Field) -> Result<IndTower> {
    expect_kind(c, "indtower")?;
    let (d, t, tail) = system_parts(c, field)?;
    IndTower::explicit(field, d, t, tail).or_else(|e| space_error(c.path, e))
}

fn object_at(c: Cursor<'_>, field: Field) -> Result<SpaceObject> {
    let kind = req(c, "kind", |x| x.str())?;
    let kind = kind.as_str();
    Ok(match kind {
        "finvect" => SpaceObject::FinVect(FinVect { dim: field_usize(c, "dim")? }),
        "linmap" => SpaceObject::LinMap(LinMap::from_matrix(req(c, "matrix", |m| matrix_at(m, field))?)),
        "tower" => SpaceObject::Tower(tower_at(c, field)?),
        "indtower" => SpaceObject::IndTower(indtower_at(c, field)?),
        "tate" => SpaceObject::Tate(TateObj::new(
            req(c, "c_lattice", |x| tower_at(x, field))?,
            req(c, "d_lattice", |x| indtower_at(x, field))?,
        )),
        "indlc" => SpaceObject::IndLC(IndLCObj::new(field, Seq::finite(field_list(c, "summands", |x| tower_at(x, field))?))),
        "prodisc" => SpaceObject::ProDisc(ProDiscObj::new(field, Seq::finite(field_list(c, "factors", |x| indtower_at(x, field))?))),
        "builtin" => {
            let name = req(c, "name", |x| x.str())?;
            let name = name.as_str();
            match name.parse::<BuiltinName>() {
                Ok(b) => spaces::builtin_space(b, field).into(),
                Err(_) => return fail(&join(c.path, "name"), format!("unknown builtin \"{name}\"")),
            }
        }
        other => return fail(&join(c.path, "kind"), format!("unknown object kind \"{other}\"")),
    })
}

fn field_list<T>(c: Cursor<'_>, key: &str, f: impl FnMut(Cursor<'_>) -> Result<T>) -> Result<Vec<T>> {
    req(c, key, |x| list(x, f))
}

/// Parses a space object; `default_field` is used when the document has no
/// `"field"` key.
pub fn parse_object(v: &Value, default_field: Option<Field>) -> Result<SpaceObject> {
    let f = document_field(v, default_field)?;
    object_at(at(v, ""), f)
}

fn presentation_json(kind: &str, p: &Presentation) -> Value {
    json!({
        "kind": kind,
        "dims": p.dims,
        "transitions": p.transitions.iter().map(matrix_json).collect::<Vec<_>>(),
        "tail": tail_json(p.tail),
    })
}

macro_rules! emit_system {
    ($fname:ident, $ty:ty, $kind:literal) => {
        /// Emits the determining prefix when known, else `depth` levels.
        pub fn $fname(t: &$ty, depth: usize) -> spaces::Result<Value> {
            let d = t.determining_depth().unwrap_or(depth);
            Ok(presentation_json($kind, &t.materialize(d)?))
        }
    };
}

emit_system!(tower_json, Tower, "tower");
emit_system!(indtower_json, IndTower, "indtower");

pub fn tate_json(t: &TateObj, depth: usize) -> spaces::Result<Value> {
    Ok(json!({
        "kind": "tate",
        "c_lattice": tower_json(&t.c_lattice, depth)?,
        "d_lattice": indtower_json(&t.d_lattice, depth)?,
    }))
}

fn seq_prefix<T: Clone + Send + Sync + 'static>(s: &Seq<T>, depth: usize) -> spaces::Result<Vec<T>> {
    s.take(s.len().unwrap_or(depth))
}

/// Emits an object with its field. Lazy systems without a known
/// determining depth are cut at `depth` levels (and `depth` summands).
pub fn object_json(x: &SpaceObject, field: Field, depth: usize) -> spaces::Result<Value> {
    let mut v = match x {
        SpaceObject::FinVect(f) => json!({"kind": "finvect", "dim": f.dim}),
        SpaceObject::LinMap(m) => json!({"kind": "linmap", "matrix": matrix_json(m.matrix())}),
        SpaceObject::Tower(t) => tower_json(t, depth)?,
        SpaceObject::IndTower(t) => indtower_json(t, depth)?,
        SpaceObject::Tate(t) => tate_json(t, depth)?,
        SpaceObject::IndLC(o) => json!({
            "kind": "indlc",
            "summands": seq_prefix(&o.summands, depth)?.iter().map(|t| tower_json(t, depth)).collect::<spaces::Result<Vec<_>>>()?,
        }),
        SpaceObject::ProDisc(o) => json!({
            "kind": "prodisc",
            "factors": seq_prefix(&o.factors, depth)?.iter().map(|t| indtower_json(t, depth)).collect::<spaces::Result<Vec<_>>>()?,
        }),
    };
    v.as_object_mut().expect("object").insert("field".into(), json!(field.p()));
    Ok(v)
}

/// Everything a grid document may carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridDocument {
    pub grid: BidirectedGrid,
    pub witness: Option<SESWitness>,
    pub product: Option<PairingFamily>,
    pub coproduct: Option<PairingFamily>,
    pub pd: Option<PDWitness>,
}

fn cell_at(c: Cursor<'_>) -> Result<(usize, usize)> {
    let v = list(c, |x| x.usize())?;
    match v.as_slice() {
        [r, col] if *r >= 1 && *col >= 1 => Ok((r - 1, col - 1)),
        _ => fail(c.path, "expected a 1-based cell [row, column]"),
    }
}

fn family_at(c: Cursor<'_>, field: Field, kind: PairingKind) -> Result<PairingFamily> {
    let entries = list(c, |e| {
        Ok(PairingEntry {
            source: field_cell(e, "source")?,
            target: field_cell(e, "target")?,
            matrix: req(e, "matrix", |m| matrix_at(m, field))?,
        })
    })?;
    Ok(PairingFamily { kind, entries })
}

fn field_cell(c: Cursor<'_>, key: &str) -> Result<(usize, usize)> {
    req(c, key, cell_at)
}

fn witness_at(c: Cursor<'_>, field: Field) -> Result<SESWitness> {
    let mats = |key: &str| field_list(c, key, |m| matrix_at(m, field));
    let grid_mats = |key: &str| req(c, key, |x| grid_of(x, |m| matrix_at(m, field)));
    Ok(SESWitness {
        v_dims: field_list(c, "v_dims", |x| x.usize())?,
        v_maps: mats("v_maps")?,
        w_dims: field_list(c, "w_dims", |x| x.usize())?,
        w_maps: mats("w_maps")?,
        inj: grid_mats("inj")?,
        surj: grid_mats("surj")?,
    })
}

pub fn parse_grid(v: &Value, default_field: Option<Field>) -> Result<GridDocument> {
    let f = document_field(v, default_field)?;
    let c = at(v, "");
    let m = field_usize(c, "m")?;
    let n = field_usize(c, "n")?;
    if m == 0 || n == 0 {
        return fail("/m", "grid needs at least one row and one column");
    }
    let grid = BidirectedGrid {
        field: f,
        m,
        n,
        dims: req(c, "dims", |x| grid_of(x, |x| x.usize()))?,
        right: req(c, "right", |x| grid_of(x, |mm| matrix_at(mm, f)))?,
        up: req(c, "up", |x| grid_of(x, |mm| matrix_at(mm, f)))?,
    };
    let witness = opt_field(c, "ses", |x| witness_at(x, f))?;
    let pairings = opt_field(c, "pairings", |p| {
        Ok((
            opt_field(p, "product", |x| family_at(x, f, PairingKind::Product))?,
            opt_field(p, "coproduct", |x| family_at(x, f, PairingKind::Coproduct))?,
        ))
    })?;
    let (product, coproduct) = pairings.unwrap_or((None, None));
    let pd = opt_field(c, "pd", |p| {
        Ok(PDWitness {
            f: req(p, "f", |x| grid_of(x, |mm| matrix_at(mm, f)))?,
            g: req(p, "g", |x| grid_of(x, |mm| matrix_at(mm, f)))?,
        })
    })?;
    Ok(GridDocument {
        grid,
        witness,
        product,
        coproduct,
        pd,
    })
}

fn mats_json(ms: &[Matrix]) -> Value {
    Value::Array(ms.iter().map(matrix_json).collect())
}

fn grid_mats_json(ms: &[Vec<Matrix>]) -> Value {
    Value::Array(ms.iter().map(|row| mats_json(row)).collect())
}

fn family_json(f: &PairingFamily) -> Value {
    Value::Array(
        f.entries
            .iter()
            .map(|e| {
                json!({
                    "source": [e.source.0 + 1, e.source.1 + 1],
                    "target": [e.target.0 + 1, e.target.1 + 1],
                    "matrix": matrix_json(&e.matrix),
                })
            })
            .collect(),
    )
}

pub fn witness_json(w: &SESWitness) -> Value {
    json!({
        "v_dims": w.v_dims,
        "v_maps": mats_json(&w.v_maps),
        "w_dims": w.w_dims,
        "w_maps": mats_json(&w.w_maps),
        "inj": grid_mats_json(&w.inj),
        "surj": grid_mats_json(&w.surj),
    })
}

pub fn grid_json(doc: &GridDocument) -> Value {
    let g = &doc.grid;
    let mut out = json!({
        "field": g.field.p(),
        "m": g.m,
        "n": g.n,
        "dims": g.dims,
        "right": grid_mats_json(&g.right),
        "up": grid_mats_json(&g.up),
    });
    let map = out.as_object_mut().expect("object");
    if let Some(w) = &doc.witness {
        map.insert("ses".into(), witness_json(w));
    }
    if doc.product.is_some() || doc.coproduct.is_some() {
        let mut p = Map::new();
        if let Some(f) = &doc.product {
            p.insert("product".into(), family_json(f));
        }
        if let Some(f) = &doc.coproduct {
            p.insert("coproduct".into(), family_json(f));
        }
        map.insert("pairings".into(), Value::Object(p));
    }
    if let Some(pd) = &doc.pd {
        map.insert("pd".into(), json!({"f": grid_mats_json(&pd.f), "g": grid_mats_json(&pd.g)}));
    }
    out
}

/// Canonical text form: pretty-printed with sorted keys and a trailing
/// newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
