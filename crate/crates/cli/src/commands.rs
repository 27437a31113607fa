use std::io::Read;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde_json::{json, Value};

use tatespace::bidirected::{self, validate_grid};
use tatespace::duality::dual_object;
use tatespace::exactla::Field;
use tatespace::gen;
use tatespace::json::{self, GridDocument, JsonError};
use tatespace::random;
use tatespace::spaces::SpaceObject;
use tatespace::suites::{self, Suite};
use tatespace::tensor;

use crate::{Cli, Command, GenKind, SuiteArg, TensorOp};

enum Failure {
    /// Malformed input; exit 2.
    Input(JsonError),
    /// A check ran and failed; the document is still emitted. Exit 1.
    Check(Value),
}

impl From<JsonError> for Failure {
    fn from(e: JsonError) -> Self {
        Self::Input(e)
    }
}

fn input_error(path: &str, message: impl Into<String>) -> Failure {
    Failure::Input(JsonError {
        path: path.into(),
        message: message.into(),
    })
}

fn check_failure(path: &str, message: impl std::fmt::Display) -> Failure {
    Failure::Check(json!({"status": "failed", "error": {"path": path, "message": message.to_string()}}))
}

struct Ctx {
    field: Field,
    depth: usize,
    seed: u64,
}

pub fn run(cli: &Cli) -> u8 {
    let field = match Field::new(cli.field) {
        Ok(f) => f,
        Err(_) => {
            let e = JsonError {
                path: "--field".into(),
                message: format!("{} is not a supported prime", cli.field),
            };
            print!("{}", json::to_canonical_string(&e.to_json()));
            return 2;
        }
    };
    let ctx = Ctx {
        field,
        depth: cli.depth as usize,
        seed: cli.seed,
    };
    let result = match &cli.command {
        Command::Decompose { input } => decompose(&ctx, input.as_deref()),
        Command::Dual { input } => dual(&ctx, input.as_deref()),
        Command::Tensor { op, a, b } => tensor_cmd(&ctx, *op, a, b),
        Command::Check { suite } => check(&ctx, *suite),
        Command::Gen { kind, truth, pairings } => generate(&ctx, *kind, cli.out.as_deref(), truth.as_deref(), *pairings),
        Command::Report { input } => report(input.as_deref()).map(Output::Text),
    };
    match result {
        Ok(out) => match emit(cli.out.as_deref(), &out) {
            Ok(()) => 0,
            Err(e) => {
                print!("{}", json::to_canonical_string(&e.to_json()));
                2
            }
        },
        Err(Failure::Check(v)) => match emit(cli.out.as_deref(), &Output::Json(v)) {
            Ok(()) => 1,
            Err(e) => {
                print!("{}", json::to_canonical_string(&e.to_json()));
                2
            }
        },
        Err(Failure::Input(e)) => {
            print!("{}", json::to_canonical_string(&e.to_json()));
            2
        }
    }
}

enum Output {
    Json(Value),
    Text(String),
}

fn emit(out: Option<&Path>, o: &Output) -> Result<(), JsonError> {
    let text = match o {
        Output::Json(v) => json::to_canonical_string(v),
        Output::Text(s) => s.clone(),
    };
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| JsonError {
            path: "--out".into(),
            message: format!("cannot write {}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_json(input: Option<&Path>) -> Result<Value, Failure> {
    let mut text = String::new();
    match input {
        None => std::io::stdin().read_to_string(&mut text).map(|_| ()),
        Some(p) if p == Path::new("-") => std::io::stdin().read_to_string(&mut text).map(|_| ()),
        Some(p) => std::fs::read_to_string(p).map(|s| text = s),
    }
    .map_err(|e| input_error("/", format!("cannot read input: {e}")))?;
    serde_json::from_str(&text).map_err(|e| input_error("/", format!("invalid JSON: {e}")))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn matrices(ms: &[tatespace::exactla::Matrix]) -> Value {
    Value::Array(ms.iter().map(json::matrix_json).collect())
}

fn decompose(ctx: &Ctx, input: Option<&Path>) -> Result<Output, Failure> {
    let doc = json::parse_grid(&read_json(input)?, Some(ctx.field))?;
    let (g, w) = (&doc.grid, doc.witness.as_ref().ok_or_else(|| input_error("/", "decompose needs an \"ses\" witness"))?);
    let validation = validate_grid(g, Some(w));
    if !validation.is_ok() {
        return Err(Failure::Check(json!({
            "kind": "validation-report",
            "status": "invalid",
            "validation": to_value(&validation),
        })));
    }
    let cob = bidirected::split_grid(g, w).map_err(|e| check_failure("/", e))?;
    let dec = bidirected::rfh_decompose(g, w, &cob).map_err(|e| check_failure("/", e))?;
    let kappa = bidirected::kappa_check(g, w, &cob).map_err(|e| check_failure("/", e))?;
    let mut pairings = serde_json::Map::new();
    let mut pairing_ok = true;
    if let Some(p) = &doc.product {
        let rep = bidirected::assemble_product(g, w, &cob, p).map_err(|e| check_failure("/pairings/product", e))?;
        pairing_ok &= rep.is_ok();
        pairings.insert("product".into(), to_value(&rep));
    }
    if let Some(p) = &doc.coproduct {
        let rep = bidirected::assemble_coproduct(g, w, &cob, p).map_err(|e| check_failure("/pairings/coproduct", e))?;
        pairing_ok &= rep.is_ok();
        pairings.insert("coproduct".into(), to_value(&rep));
    }
    if let Some(pd) = &doc.pd {
        let (Some(mu), Some(lambda)) = (&doc.product, &doc.coproduct) else {
            return Err(input_error("/pd", "a duality witness needs both product and coproduct families"));
        };
        let rep = bidirected::check_pd_intertwine(g, w, mu, lambda, pd).map_err(|e| check_failure("/pd", e))?;
        pairing_ok &= rep.is_ok();
        pairings.insert("pd".into(), to_value(&rep));
    }
    let tate = json::tate_json(&dec.tate, g.m.max(g.n)).map_err(|e| check_failure("/", e))?;
    let mut out = json!({
        "kind": "rfh-decomposition",
        "status": if pairing_ok { "ok" } else { "pairing-violations" },
        "field": g.field.p(),
        "m": g.m,
        "n": g.n,
        "v_dims": w.v_dims,
        "w_dims": w.w_dims,
        "tate": tate,
        "iota": matrices(&dec.iota),
        "pi": matrices(&dec.pi),
        "opens": matrices(&dec.opens),
        "open_dims": dec.opens.iter().map(|u| u.cols()).collect::<Vec<_>>(),
        "basis": Value::Array(cob.basis.iter().map(|row| matrices(row)).collect()),
        "kappa": {
            "source_dim": kappa.source_dim,
            "target_dim": kappa.target_dim,
            "matrix": json::matrix_json(&kappa.kappa),
            "normal_form_identity": kappa.normal_form.is_identity(),
        },
        "validation": {"checked": validation.checked, "violations": []},
    });
    if !pairings.is_empty() {
        out.as_object_mut().expect("object").insert("pairings".into(), Value::Object(pairings));
    }
    if pairing_ok {
        Ok(Output::Json(out))
    } else {
        Err(Failure::Check(out))
    }
}

fn is_grid(v: &Value) -> bool {
    v.get("m").is_some() && v.get("n").is_some() && v.get("kind").is_none()
}

fn dual(ctx: &Ctx, input: Option<&Path>) -> Result<Output, Failure> {
    let v = read_json(input)?;
    if is_grid(&v) {
        let doc = json::parse_grid(&v, Some(ctx.field))?;
        let w = doc.witness.as_ref().ok_or_else(|| input_error("/", "the dual of a grid needs its \"ses\" witness"))?;
        let validation = validate_grid(&doc.grid, Some(w));
        if !validation.is_ok() {
            return Err(Failure::Check(json!({"kind": "validation-report", "status": "invalid", "validation": to_value(&validation)})));
        }
        let (dg, dw) = bidirected::dual_grid(&doc.grid, w).map_err(|e| check_failure("/", e))?;
        bidirected::check_dual_decomposition(&doc.grid, w).map_err(|e| check_failure("/", e))?;
        return Ok(Output::Json(json::grid_json(&GridDocument {
            grid: dg,
            witness: Some(dw),
            product: None,
            coproduct: None,
            pd: None,
        })));
    }
    let obj = json::parse_object(&v, Some(ctx.field))?;
    let field = json::document_field(&v, Some(ctx.field))?;
    let d = dual_object(&obj);
    Ok(Output::Json(json::object_json(&d, field, ctx.depth).map_err(|e| check_failure("/", e))?))
}

fn tensor_cmd(ctx: &Ctx, op: TensorOp, a: &Path, b: &Path) -> Result<Output, Failure> {
    let (va, vb) = (read_json(Some(a))?, read_json(Some(b))?);
    let fa = json::document_field(&va, Some(ctx.field))?;
    let fb = json::document_field(&vb, Some(ctx.field))?;
    if fa != fb {
        return Err(input_error("/field", format!("operands live over GF({}) and GF({})", fa.p(), fb.p())));
    }
    let x = json::parse_object(&va, Some(fa))?;
    let y = json::parse_object(&vb, Some(fb))?;
    let t = |e: tensor::TensorError| check_failure("/", e);
    let out = match (op, &x, &y) {
        (_, SpaceObject::Tower(p), SpaceObject::Tower(q)) => SpaceObject::Tower(tensor::tensor_star_towers(p, q).map_err(t)?),
        (_, SpaceObject::IndTower(p), SpaceObject::IndTower(q)) => SpaceObject::IndTower(tensor::tensor_indtowers(p, q).map_err(t)?),
        (TensorOp::Star, SpaceObject::IndLC(p), SpaceObject::IndLC(q)) => SpaceObject::IndLC(tensor::tensor_star_indlc(p, q).map_err(t)?),
        (TensorOp::Bang, SpaceObject::ProDisc(p), SpaceObject::ProDisc(q)) => SpaceObject::ProDisc(tensor::tensor_bang_prodisc(p, q).map_err(t)?),
        (TensorOp::Star, SpaceObject::Tate(p), SpaceObject::Tate(q)) => SpaceObject::IndLC(tensor::tensor_star_tate(p, q).map_err(t)?),
        (TensorOp::Bang, SpaceObject::Tate(p), SpaceObject::Tate(q)) => SpaceObject::ProDisc(tensor::tensor_bang_tate(p, q).map_err(t)?),
        _ => {
            let op = match op {
                TensorOp::Star => "star",
                TensorOp::Bang => "bang",
            };
            return Err(input_error(
                "/kind",
                format!("no {op} tensor product for kinds {} and {}", x.kind_name(), y.kind_name()),
            ));
        }
    };
    Ok(Output::Json(json::object_json(&out, fa, ctx.depth).map_err(|e| check_failure("/", e))?))
}

fn check(ctx: &Ctx, suite: SuiteArg) -> Result<Output, Failure> {
    let suite = match suite {
        SuiteArg::Laws => Suite::Laws,
        SuiteArg::Grid => Suite::Grid,
        SuiteArg::Appendix => Suite::Appendix,
    };
    let rep = suites::run_suite(suite, ctx.seed);
    let mut v = to_value(&rep);
    v.as_object_mut().expect("object").insert("kind".into(), json!("suite-report"));
    if rep.passed {
        Ok(Output::Json(v))
    } else {
        Err(Failure::Check(v))
    }
}

fn sidecar_path(out: Option<&Path>, truth: Option<&Path>) -> Option<PathBuf> {
    if let Some(t) = truth {
        return Some(t.to_path_buf());
    }
    let out = out?;
    let name = out.file_name()?.to_string_lossy();
    let stem = name.strip_suffix(".json").unwrap_or(&name);
    Some(out.with_file_name(format!("{stem}.truth.json")))
}

fn generate(ctx: &Ctx, kind: GenKind, out: Option<&Path>, truth: Option<&Path>, pairings: bool) -> Result<Output, Failure> {
    let mut rng = random::rng(ctx.seed);
    let f = ctx.field;
    match kind {
        GenKind::Grid => {
            let (doc, planted) = if pairings {
                let (m, n) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
                let p = gen::planted_pd(&mut rng, f, m, n, 4);
                let doc = GridDocument {
                    grid: p.planted.grid.clone(),
                    witness: Some(p.planted.witness.clone()),
                    product: Some(p.mu),
                    coproduct: Some(p.lambda),
                    pd: Some(p.pd),
                };
                (doc, p.planted)
            } else {
                let p = gen::random_planted_grid(&mut rng, f, 4, 6);
                let doc = GridDocument {
                    grid: p.grid.clone(),
                    witness: Some(p.witness.clone()),
                    product: None,
                    coproduct: None,
                    pd: None,
                };
                (doc, p)
            };
            let truth_doc = json!({
                "kind": "grid-truth",
                "seed": ctx.seed,
                "field": f.p(),
                "m": planted.grid.m,
                "n": planted.grid.n,
                "v_dims": planted.truth.v_dims,
                "w_dims": planted.truth.w_dims,
                "v_maps": matrices(&planted.truth.v_maps),
                "w_maps": matrices(&planted.truth.w_maps),
            });
            let mut grid = json::grid_json(&doc);
            match sidecar_path(out, truth) {
                Some(p) => std::fs::write(&p, json::to_canonical_string(&truth_doc)).map_err(|e| input_error("--truth", format!("cannot write {}: {e}", p.display())))?,
                None => {
                    grid.as_object_mut().expect("object").insert("truth".into(), truth_doc);
                }
            }
            Ok(Output::Json(grid))
        }
        GenKind::Tate => {
            let t = random::tate(&mut rng, f, ctx.depth, 4);
            Ok(Output::Json(json::object_json(&SpaceObject::Tate(t), f, ctx.depth).map_err(|e| check_failure("/", e))?))
        }
        GenKind::Tower => {
            let t = random::tower(&mut rng, f, ctx.depth, 4);
            Ok(Output::Json(json::object_json(&SpaceObject::Tower(t), f, ctx.depth).map_err(|e| check_failure("/", e))?))
        }
    }
}

fn dims_of(v: &Value) -> String {
    match v.get("dims") {
        Some(d) => d.to_string(),
        None => "[]".into(),
    }
}

fn report(input: Option<&Path>) -> Result<String, Failure> {
    let v = read_json(input)?;
    let mut lines = Vec::new();
    if let Some(err) = v.get("error") {
        lines.push(format!("error at {}: {}", err["path"].as_str().unwrap_or("/"), err["message"].as_str().unwrap_or("")));
    } else if is_grid(&v) {
        lines.push(format!("grid {} x {} over GF({})", v["m"], v["n"], v["field"]));
        if let Some(rows) = v["dims"].as_array() {
            for (r, row) in rows.iter().enumerate() {
                lines.push(format!("  row {}: {}", r + 1, row));
            }
        }
        lines.push(format!("  witness: {}", if v.get("ses").is_some() { "present" } else { "absent" }));
        if let Some(p) = v.get("pairings") {
            let kinds: Vec<&str> = ["product", "coproduct"].into_iter().filter(|k| p.get(*k).is_some()).collect();
            lines.push(format!("  pairings: {}", kinds.join(", ")));
        }
    } else {
        match v.get("kind").and_then(Value::as_str) {
            Some("rfh-decomposition") => {
                lines.push(format!("decomposition of a {} x {} grid over GF({}): {}", v["m"], v["n"], v["field"], v["status"].as_str().unwrap_or("")));
                lines.push(format!("  discrete part V dims: {}", v["v_dims"]));
                lines.push(format!("  compact part W dims:  {}", v["w_dims"]));
                lines.push(format!("  open subspaces U_r dims: {}", v["open_dims"]));
                lines.push(format!(
                    "  kappa: {} -> {}, identity in normal form: {}",
                    v["kappa"]["source_dim"], v["kappa"]["target_dim"], v["kappa"]["normal_form_identity"]
                ));
                lines.push(format!("  checked identities: {}", v["validation"]["checked"]));
                if let Some(p) = v.get("pairings").and_then(Value::as_object) {
                    for (k, rep) in p {
                        let n = rep["violations"].as_array().map_or(0, Vec::len);
                        lines.push(format!("  {k}: {} checks, {n} violations", rep["checked"]));
                    }
                }
            }
            Some("validation-report") => {
                let vs = v["validation"]["violations"].as_array().cloned().unwrap_or_default();
                lines.push(format!("invalid grid: {} violation(s)", vs.len()));
                for x in vs {
                    lines.push(format!("  {} at ({}, {}): {}", x["kind"].as_str().unwrap_or(""), x["cell"][0], x["cell"][1], x["detail"].as_str().unwrap_or("")));
                }
            }
            Some("suite-report") => {
                let laws = v["laws"].as_array().cloned().unwrap_or_default();
                let failed = laws.iter().filter(|l| l["passed"] != json!(true)).count();
                lines.push(format!("suite {} (seed {}): {} laws, {failed} failed", v["suite"].as_str().unwrap_or(""), v["seed"], laws.len()));
                for l in laws {
                    let mark = if l["passed"] == json!(true) { "PASS" } else { "FAIL" };
                    lines.push(format!("  {mark} {}/{} ({} instances) {}", l["module"].as_str().unwrap_or(""), l["id"].as_str().unwrap_or(""), l["instances"], l["detail"].as_str().unwrap_or("")).trim_end().to_string());
                }
            }
            Some("grid-truth") => {
                lines.push(format!("planted grid {} x {} over GF({}), seed {}", v["m"], v["n"], v["field"], v["seed"]));
                lines.push(format!("  V dims: {}", v["v_dims"]));
                lines.push(format!("  W dims: {}", v["w_dims"]));
            }
            Some("tate") => {
                lines.push(format!("tate object over GF({})", v["field"]));
                lines.push(format!("  c-lattice dims: {}", dims_of(&v["c_lattice"])));
                lines.push(format!("  d-lattice dims: {}", dims_of(&v["d_lattice"])));
            }
            Some(kind @ ("tower" | "indtower")) => {
                lines.push(format!("{kind} over GF({}), tail {}", v["field"], v["tail"]["kind"].as_str().unwrap_or("unspecified")));
                lines.push(format!("  dims: {}", dims_of(&v)));
            }
            Some(kind @ ("indlc" | "prodisc")) => {
                let key = if kind == "indlc" { "summands" } else { "factors" };
                let parts = v[key].as_array().cloned().unwrap_or_default();
                lines.push(format!("{kind} over GF({}) with {} {key} shown", v["field"], parts.len()));
                for (i, p) in parts.iter().enumerate() {
                    lines.push(format!("  {}: dims {}", i + 1, dims_of(p)));
                }
            }
            Some(other) => lines.push(format!("{other} document")),
            None => return Err(input_error("/", "not a recognized document")),
        }
    }
    let mut s = lines.join("\n");
    s.push('\n');
    Ok(s)
}
