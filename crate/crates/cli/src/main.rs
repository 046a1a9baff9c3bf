use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use spreadlab::closure::{closure, restricted_closure, verify_subplane_lemma, Point};
use spreadlab::fieldreduction::desarguesian_spread;
use spreadlab::gf::{FieldTower, Gf};
use spreadlab::projgeom::standard_element;
use spreadlab::scenarios::{self, named_spread_set, ScenarioParams, SCHEMA};
use spreadlab::sperner::{spread_hash, LineMode, SpernerSpace};
use spreadlab::spreads::{construct_s_r, construct_t3, construct_u_r, Spread, SpreadJson};
use spreadlab::spreadsets::{
    dickson_nearfield, search_closed_spread_sets, Closure, Quasifield, SpreadSet, DEFAULT_SEARCH_BUDGET,
};
use spreadlab::{Error, Result};

#[derive(Parser)]
#[command(name = "spreadlab", version, about = "Spreads, normal elements and their geometry over finite fields")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Debug)]
struct Global {
    /// Order of the base field F_q.
    #[arg(long, global = true)]
    q: Option<u32>,
    /// Dimension of spread elements as vector spaces.
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Ambient dimension is r*n.
    #[arg(long, global = true)]
    r: Option<usize>,
    /// Subfield order for regulus closure.
    #[arg(long, global = true)]
    q0: Option<u32>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Use the unoptimized reference checks where available.
    #[arg(long, global = true)]
    oracle: bool,
    /// Node budget for exhaustive searches.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Also write the report into this directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    #[command(subcommand)]
    Field(FieldCmd),
    #[command(subcommand)]
    Spread(SpreadCmd),
    #[command(subcommand)]
    Spreadset(SpreadsetCmd),
    /// Regulus closure of S(M) at the shears element (0, I).
    Regulus(RegulusArgs),
    #[command(subcommand)]
    Closure(ClosureCmd),
    #[command(subcommand)]
    Sperner(SpernerCmd),
    #[command(subcommand)]
    Scenario(ScenarioCmd),
}

#[derive(Subcommand)]
enum FieldCmd {
    /// Field tower F_q < F_{q^n}: moduli, generators, embedding.
    Info,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Desarguesian,
    #[value(name = "s-r")]
    SR,
    T3,
    #[value(name = "u-r")]
    UR,
}

#[derive(Args, Clone, Debug)]
struct SpreadSource {
    /// Construction (positional form of --kind).
    #[arg(value_enum)]
    kind_pos: Option<Kind>,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Spread set M: field, dickson, mul:<i>, add:<i>, random, random0.
    #[arg(long, default_value = "field")]
    set: String,
    /// Second spread set M_0 of T_3.
    #[arg(long, default_value = "field")]
    m0: String,
    /// Spread sets M_1,...,M_{r-1} of U_r, comma separated (default: all field).
    #[arg(long, value_delimiter = ',')]
    sub: Vec<String>,
    /// Load the spread from a JSON file instead of constructing it.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SpreadCmd {
    /// Construct a spread and validate it.
    Build(SpreadSource),
    /// Validate a spread (partition check).
    Verify(SpreadSource),
    /// List the normal elements.
    Normals(SpreadSource),
    /// Largest set of normal elements in general position.
    Maxgp(SpreadSource),
}

#[derive(Args, Clone, Debug)]
struct SetArg {
    #[arg(long, default_value = "field")]
    set: String,
}

#[derive(Subcommand)]
enum SpreadsetCmd {
    /// Exhaustive search for closed spread sets containing 0 and I.
    Search {
        #[arg(long, default_value = "multiplication")]
        closure: Closure,
    },
    /// Dickson nearfield spread set and its quasifield.
    Dickson,
    /// Right nucleus, middle nucleus and centre of a spread set.
    Nuclei(SetArg),
    /// Quasifield axioms of the quasifield coordinatizing a spread set.
    Axioms(SetArg),
}

#[derive(Args, Clone, Debug)]
struct RegulusArgs {
    #[arg(long, default_value = "field")]
    set: String,
    /// Fail (exit 1) unless closure evaluates to this value.
    #[arg(long)]
    expect: Option<bool>,
}

#[derive(Subcommand)]
enum ClosureCmd {
    /// Closure (or restricted closure) of points of PG(2, q).
    Run {
        /// Points as field codes, e.g. "1,0,0;0,1,0;0,0,1;1,1,1".
        #[arg(long)]
        points: String,
        /// Pivot points for the restricted closure.
        #[arg(long)]
        pivots: Option<String>,
    },
    /// Restricted closure of random frames against the F_p-subplane.
    Lemma53 {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum SpernerCmd {
    /// Build the Sperner space of a spread and check the design axioms.
    Build(SpreadSource),
    /// Normality of the lines of every parallel class.
    Normals(SpreadSource),
    /// Point-line incidences as CSV.
    Export(SpreadSource),
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Run a named scenario.
    Run {
        id: String,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// List the scenario catalog.
    List,
}

struct Outcome {
    pass: bool,
    result: Value,
    csv: Option<String>,
}

impl Outcome {
    fn json(pass: bool, result: Value) -> Self {
        Outcome { pass, result, csv: None }
    }
}

enum Failure {
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(pass) => ExitCode::from(if pass { 0 } else { 1 }),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn params(g: &Global) -> Value {
    json!({"q": g.q, "n": g.n, "r": g.r, "q0": g.q0, "seed": g.seed, "oracle": g.oracle, "budget": g.budget})
}

fn execute(cli: &Cli) -> std::result::Result<bool, Failure> {
    let g = &cli.global;
    let (name, out): (String, Outcome) = match &cli.cmd {
        Cmd::Scenario(ScenarioCmd::List) => {
            ("scenario-list".into(), Outcome::json(true, serde_json::to_value(scenarios::catalog()).unwrap()))
        }
        Cmd::Scenario(ScenarioCmd::Run { id, trials }) => {
            let p = ScenarioParams {
                q: g.q,
                n: g.n,
                r: g.r,
                q0: g.q0,
                seed: g.seed,
                budget: g.budget,
                oracle: g.oracle,
                trials: *trials,
            };
            let rep = scenarios::run(id, &p)?;
            let csv = rep.checks.iter().fold("check,pass\n".to_string(), |mut s, c| {
                s.push_str(&format!("{},{}\n", c.name, c.pass));
                s
            });
            let body = serde_json::to_string_pretty(&rep).unwrap();
            return emit(g, &format!("scenario-{id}"), rep.pass, body, Some(csv));
        }
        Cmd::Field(FieldCmd::Info) => {
            let t = tower(g)?;
            ("field-info".into(), Outcome::json(true, serde_json::to_value(t.info()).unwrap()))
        }
        Cmd::Spread(c) => spread_cmd(g, c)?,
        Cmd::Spreadset(c) => spreadset_cmd(g, c)?,
        Cmd::Regulus(a) => ("regulus".into(), regulus_cmd(g, a)?),
        Cmd::Closure(c) => closure_cmd(g, c)?,
        Cmd::Sperner(c) => sperner_cmd(g, c)?,
    };
    let body = serde_json::to_string_pretty(&json!({
        "schema": SCHEMA,
        "command": name,
        "params": params(g),
        "pass": out.pass,
        "result": out.result,
    }))
    .unwrap();
    emit(g, &name, out.pass, body, out.csv)
}

fn emit(g: &Global, name: &str, pass: bool, json_body: String, csv: Option<String>) -> std::result::Result<bool, Failure> {
    let (text, ext) = match g.format {
        Format::Json => (json_body + "\n", "json"),
        Format::Csv => (csv.ok_or_else(|| Failure::Usage(format!("{name}: no CSV form; use --format json")))?, "csv"),
    };
    if let Some(dir) = &g.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
        let path = dir.join(format!("{name}.{ext}"));
        std::fs::write(&path, &text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    print!("{text}");
    Ok(pass)
}

fn tower(g: &Global) -> Result<FieldTower> {
    FieldTower::for_q(g.q.unwrap_or(3) as u64, g.n.unwrap_or(2))
}

fn budget(g: &Global) -> u64 {
    g.budget.unwrap_or(DEFAULT_SEARCH_BUDGET)
}

fn spread_set(g: &Global, t: &FieldTower, name: &str) -> Result<SpreadSet> {
    named_spread_set(t, name, g.seed, budget(g))
}

fn load_spread(g: &Global, src: &SpreadSource) -> std::result::Result<Spread, Failure> {
    if let Some(path) = &src.input {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let j: SpreadJson = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return Ok(Spread::from_json(&j)?);
    }
    let t = tower(g)?;
    let f = t.base();
    let r = g.r.unwrap_or(3);
    let kind = src.kind.or(src.kind_pos).unwrap_or(Kind::Desarguesian);
    let s = match kind {
        Kind::Desarguesian => desarguesian_spread(&t, r)?,
        Kind::SR => construct_s_r(f, &spread_set(g, &t, &src.set)?, r)?,
        Kind::T3 => {
            if r != 3 {
                return Err(Failure::Usage("t3 needs --r 3".into()));
            }
            construct_t3(f, &spread_set(g, &t, &src.set)?, &spread_set(g, &t, &src.m0)?)?
        }
        Kind::UR => {
            let names = if src.sub.is_empty() { vec!["field".to_string(); r.saturating_sub(1)] } else { src.sub.clone() };
            if names.len() + 1 != r {
                return Err(Failure::Usage(format!("u-r needs {} sets in --sub", r.saturating_sub(1))));
            }
            let ms = names.iter().map(|n| spread_set(g, &t, n)).collect::<Result<Vec<_>>>()?;
            construct_u_r(f, &spread_set(g, &t, &src.set)?, &ms)?
        }
    };
    Ok(s)
}

type Named = (String, Outcome);

fn spread_cmd(g: &Global, c: &SpreadCmd) -> std::result::Result<Named, Failure> {
    Ok(match c {
        SpreadCmd::Build(src) => {
            let s = load_spread(g, src)?;
            let check = s.validate();
            let csv = s.elements().iter().enumerate().fold("index,basis\n".to_string(), |mut acc, (i, e)| {
                let b = e.basis();
                let rows: Vec<String> = (0..b.rows())
                    .map(|i| b.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
                    .collect();
                acc.push_str(&format!("{i},{}\n", rows.join(";")));
                acc
            });
            let result = json!({"elements": s.len(), "validate": check, "spread": s.to_json()});
            ("spread-build".into(), Outcome { pass: check.valid, result, csv: Some(csv) })
        }
        SpreadCmd::Verify(src) => {
            let s = load_spread(g, src)?;
            let check = s.validate();
            let result = json!({"provenance": s.provenance(), "elements": s.len(), "validate": check});
            ("spread-verify".into(), Outcome::json(check.valid, result))
        }
        SpreadCmd::Normals(src) => {
            let s = load_spread(g, src)?;
            let check = s.validate();
            if !check.valid {
                return Ok(("spread-normals".into(), Outcome::json(false, json!({"validate": check}))));
            }
            let normals = s.normal_indices();
            let csv = (0..s.len()).fold("index,normal\n".to_string(), |mut acc, i| {
                acc.push_str(&format!("{i},{}\n", normals.binary_search(&i).is_ok()));
                acc
            });
            let result = json!({"elements": s.len(), "normal_count": normals.len(), "normal_indices": normals});
            ("spread-normals".into(), Outcome { pass: true, result, csv: Some(csv) })
        }
        SpreadCmd::Maxgp(src) => {
            let s = load_spread(g, src)?;
            let check = s.validate();
            if !check.valid {
                return Ok(("spread-maxgp".into(), Outcome::json(false, json!({"validate": check}))));
            }
            let gp = s.max_normal_general_position();
            let result = json!({
                "r": s.r(),
                "max_normal_general_position": gp.size,
                "witness": gp.witness,
                "desarguesian": s.is_desarguesian(),
            });
            ("spread-maxgp".into(), Outcome::json(true, result))
        }
    })
}

fn spreadset_cmd(g: &Global, c: &SpreadsetCmd) -> std::result::Result<Named, Failure> {
    let t = tower(g)?;
    let f = t.base();
    Ok(match c {
        SpreadsetCmd::Search { closure: cl } => {
            let found = search_closed_spread_sets(f, t.n() as usize, *cl, budget(g))?;
            let mut csv = "index,size,nearfield,semifield\n".to_string();
            let sets: Vec<Value> = found
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let j = m.to_json(f);
                    csv.push_str(&format!("{i},{},{},{}\n", m.len(), j.flags.nearfield, j.flags.semifield));
                    serde_json::to_value(j).unwrap()
                })
                .collect();
            let result = json!({"closure": cl, "count": found.len(), "sets": sets});
            ("spreadset-search".into(), Outcome { pass: true, result, csv: Some(csv) })
        }
        SpreadsetCmd::Dickson => {
            let (m, qf) = dickson_nearfield(&t, budget(g))?;
            let axioms = qf.axioms();
            let result = json!({
                "set": m.to_json(f),
                "axioms": axioms,
                "kernel_size": qf.kernel().len(),
                "quasifield": qf.to_json(),
            });
            ("spreadset-dickson".into(), Outcome::json(axioms.is_nearfield(), result))
        }
        SpreadsetCmd::Nuclei(a) => {
            let m = spread_set(g, &t, &a.set)?;
            let q = t.q();
            let enc = |v: Vec<spreadlab::linalg::Matrix>| -> Value {
                json!({"size": v.len(), "matrices": v.iter().map(|x| x.to_json(q)).collect::<Vec<_>>()})
            };
            let result = json!({
                "set": a.set,
                "right_nucleus": enc(m.right_nucleus(f)),
                "middle_nucleus": enc(m.middle_nucleus(f)),
                "center": enc(m.center(f)),
            });
            ("spreadset-nuclei".into(), Outcome::json(true, result))
        }
        SpreadsetCmd::Axioms(a) => {
            let m = spread_set(g, &t, &a.set)?;
            let check = m.validate(f);
            if !check.valid || !check.contains_zero || !check.contains_identity {
                return Ok(("spreadset-axioms".into(), Outcome::json(false, json!({"validate": check}))));
            }
            let qf = Quasifield::from_spread_set_unchecked(f, &m)?;
            let axioms = qf.axioms();
            let result = json!({"set": a.set, "flags": m.flags(f), "axioms": axioms});
            ("spreadset-axioms".into(), Outcome::json(axioms.is_quasifield(), result))
        }
    })
}

fn regulus_cmd(g: &Global, a: &RegulusArgs) -> std::result::Result<Outcome, Failure> {
    let t = tower(g)?;
    let f = t.base();
    let n = t.n() as usize;
    let m = spread_set(g, &t, &a.set)?;
    let s = construct_s_r(f, &m, 2)?;
    let q0 = g.q0.unwrap_or(t.q());
    let rc = s.regulus_closure_at(&standard_element(f, 2, n, 1), q0)?;
    let pass = a.expect.is_none_or(|e| e == rc.holds);
    Ok(Outcome::json(pass, json!({"set": a.set, "q0": q0, "closure": rc, "expected": a.expect})))
}

fn parse_points(f: &Gf, text: &str) -> std::result::Result<Vec<Point>, Failure> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let v: Vec<u32> = s
                .split(',')
                .map(|x| x.trim().parse::<u32>().map_err(|_| Failure::Usage(format!("bad coordinate in '{s}'"))))
                .collect::<std::result::Result<_, _>>()?;
            if v.len() != 3 || v.iter().any(|&x| x >= f.order()) {
                return Err(Failure::Usage(format!("'{s}' is not a point of PG(2, {})", f.order())));
            }
            spreadlab::closure::normalize(f, [v[0], v[1], v[2]]).ok_or_else(|| Failure::Usage("zero vector".into()))
        })
        .collect()
}

fn closure_cmd(g: &Global, c: &ClosureCmd) -> std::result::Result<Named, Failure> {
    let f = Gf::of_order(g.q.unwrap_or(9) as u64)?;
    Ok(match c {
        ClosureCmd::Run { points, pivots } => {
            let s = parse_points(&f, points)?;
            let set = match pivots {
                Some(p) => restricted_closure(&f, &s, &parse_points(&f, p)?)?,
                None => closure(&f, &s)?,
            };
            let csv = set.iter().fold("x,y,z\n".to_string(), |mut acc, p| {
                acc.push_str(&format!("{},{},{}\n", p[0], p[1], p[2]));
                acc
            });
            let result = json!({"restricted": pivots.is_some(), "size": set.len(), "points": set});
            ("closure-run".into(), Outcome { pass: true, result, csv: Some(csv) })
        }
        ClosureCmd::Lemma53 { trials } => {
            let rep = verify_subplane_lemma(&f, *trials, g.seed)?;
            ("closure-lemma53".into(), Outcome::json(rep.pass, serde_json::to_value(&rep).unwrap()))
        }
    })
}

fn sperner_cmd(g: &Global, c: &SpernerCmd) -> std::result::Result<Named, Failure> {
    let mode = if g.oracle { LineMode::Oracle } else { LineMode::Optimized };
    Ok(match c {
        SpernerCmd::Build(src) => {
            let s = load_spread(g, src)?;
            let sp = SpernerSpace::build(&s)?;
            let result = json!({
                "points": sp.num_points(),
                "lines": sp.num_lines(),
                "classes": sp.num_classes(),
                "line_size": sp.line_size(),
                "spread_sha256": spread_hash(&s),
            });
            ("sperner-build".into(), Outcome::json(true, result))
        }
        SpernerCmd::Normals(src) => {
            let s = load_spread(g, src)?;
            let sp = SpernerSpace::build(&s)?;
            let normals = s.normal_indices();
            let lines = sp.normal_classes(mode);
            let mut csv = "class,normal_line,normal_element\n".to_string();
            let mut agree = true;
            let rows: Vec<Value> = lines
                .iter()
                .map(|l| {
                    let e = normals.binary_search(&l.class).is_ok();
                    agree &= e == l.normal;
                    csv.push_str(&format!("{},{},{}\n", l.class, l.normal, e));
                    json!({"line": l, "normal_element": e})
                })
                .collect();
            let result = json!({"mode": mode, "agree": agree, "classes": rows});
            ("sperner-normals".into(), Outcome { pass: agree, result, csv: Some(csv) })
        }
        SpernerCmd::Export(src) => {
            let s = load_spread(g, src)?;
            let sp = SpernerSpace::build(&s)?;
            let csv = sp.export_csv();
            let result = json!({"spread_sha256": spread_hash(&s), "incidences": sp.num_lines() * sp.line_size(), "csv": csv});
            ("sperner-export".into(), Outcome { pass: true, result, csv: Some(csv) })
        }
    })
}
