//! Command-line front end: builds spaces from structure or explicit-space
//! files, runs the requested analysis and prints a law report.
//!
//! Exit codes: 0 all checks pass, 1 a check failed (or an analysis error),
//! 2 usage or input error, 3 resource guard.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use cylspace::expansion::{
    base_injection, expansion_map, verify_expansion, verify_expansion_uniqueness,
};
use cylspace::laws::{
    check_space_axioms, verify_substitution_laws, LawResult, Report, Status, SubstOptions,
};
use cylspace::mapping::classify_mapping;
use cylspace::points::{verify_point_laws, PointLawOptions, PointRelations};
use cylspace::topo::{build_topologization, Formation, Topologization};
use cylspace::{
    build_expansion, build_model_space, parse_formula, parse_space, parse_structure,
    pinned_isomorphism, render_space, type_space, type_space_embedding, CylError, CylSpace,
    ExpansionContext, ExpansionOrder, FiniteStructure, PointSet, VarMap,
};

#[derive(Parser)]
#[command(
    name = "cylspace",
    version,
    about = "Finite cylindric spaces of finite structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Variable budget n (dimension of topologizations and model spaces).
    #[arg(short = 'n', global = true)]
    n: Option<usize>,
    /// Point limit for assignment spaces.
    #[arg(long, global = true, default_value_t = 4096)]
    limit: usize,
    /// Seed for sampled suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit the structured report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Run independent suites on separate threads.
    #[arg(long, global = true)]
    parallel: bool,
    /// Record wall-clock timings (makes output nondeterministic).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Explicit-space text of a structure's topologization at -n.
    Render {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        max_blocks: usize,
    },
    /// Axiom, substitution and point-law suites.
    CheckSpace { file: PathBuf },
    /// Interpretation of a formula as a set of assignments.
    Eval { file: PathBuf, formula: String },
    /// The substitution u(i/j) of a set (formula or `{p,q,..}`).
    Subst {
        file: PathBuf,
        set: String,
        i: usize,
        j: usize,
    },
    /// The permutation ρu of a set, or ρ{a} of a point with `--point`.
    /// Maps are `t0,t1,..` (total) or `i:j,..` (partial).
    Perm {
        file: PathBuf,
        map: String,
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        point: Option<String>,
    },
    /// Embedding verdict between domain points of two catalog members.
    Embed {
        files: Vec<PathBuf>,
        /// Element pins `x:y,..` for the partial variant.
        #[arg(long)]
        partial: Option<String>,
        #[arg(long, default_value_t = 0)]
        from: usize,
        #[arg(long)]
        to: Option<usize>,
    },
    /// Atoms and the α-expansion of a base (structure at -n β, or .space).
    Expand {
        file: PathBuf,
        #[arg(long)]
        alpha: usize,
    },
    /// Model space of a catalog of structures.
    Modelspace { files: Vec<PathBuf> },
    /// Type space of k-tuples over parameters, and its model-space embedding.
    Typespace {
        file: PathBuf,
        #[arg(short = 'k', default_value_t = 1)]
        k: usize,
        /// Parameters `b0,b1,..`.
        #[arg(long, default_value = "")]
        params: String,
    },
}

#[derive(Serialize, Default)]
struct Output {
    command: String,
    inputs: BTreeMap<String, String>,
    results: Vec<LawResult>,
    timings_ms: BTreeMap<String, u64>,
    counters: BTreeMap<String, usize>,
    output: Vec<String>,
}

enum Failure {
    Usage(String),
    Analysis(CylError),
}

impl From<CylError> for Failure {
    fn from(e: CylError) -> Self {
        match e {
            CylError::Syntax { .. }
            | CylError::Malformed { .. }
            | CylError::UnknownRelation(_)
            | CylError::Arity { .. }
            | CylError::Signature(_) => Failure::Usage(e.to_string()),
            other => Failure::Analysis(other),
        }
    }
}

type Run<T> = std::result::Result<T, Failure>;

struct Ctx {
    n: Option<usize>,
    limit: usize,
    seed: u64,
    parallel: bool,
    timings: bool,
    out: Output,
}

impl Ctx {
    fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let v = f();
        if self.timings {
            self.out
                .timings_ms
                .insert(phase.to_string(), start.elapsed().as_millis() as u64);
        }
        v
    }

    fn report(&mut self, r: Report) {
        self.out.results.extend(r.results);
    }

    fn line(&mut self, s: impl Into<String>) {
        self.out.output.push(s.into());
    }

    fn count(&mut self, k: &str, v: usize) {
        self.out.counters.insert(k.to_string(), v);
    }

    fn budget(&self) -> Run<usize> {
        self.n
            .ok_or_else(|| Failure::Usage("this input needs the budget -n".into()))
    }
}

fn read(path: &Path) -> Run<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_structure(path: &Path) -> Run<FiniteStructure> {
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("A");
    Ok(parse_structure(&read(path)?, name)?)
}

/// A space from a file, with its formation when the file is a structure.
fn load_space(ctx: &Ctx, path: &Path) -> Run<(CylSpace, Option<Topologization>)> {
    if path.extension().and_then(|e| e.to_str()) == Some("space") {
        return Ok((parse_space(&read(path)?)?, None));
    }
    let a = load_structure(path)?;
    let t = build_topologization(&a, ctx.budget()?, ctx.limit)?;
    Ok((t.space().clone(), Some(t)))
}

fn parse_list(text: &str) -> Run<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(|w| {
            w.parse::<usize>()
                .map_err(|_| Failure::Usage(format!("`{w}` is not a number")))
        })
        .collect()
}

fn parse_pairs(text: &str) -> Run<Vec<(usize, usize)>> {
    text.split(',')
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(|w| {
            let (a, b) = w
                .split_once(':')
                .ok_or_else(|| Failure::Usage(format!("`{w}` is not `i:j`")))?;
            let num = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Failure::Usage(format!("`{w}` is not `i:j`")))
            };
            Ok((num(a)?, num(b)?))
        })
        .collect()
}

fn parse_map(dim: usize, text: &str) -> Run<VarMap> {
    if text.contains(':') {
        Ok(VarMap::from_pairs(dim, &parse_pairs(text)?)?)
    } else {
        Ok(VarMap::total(dim, &parse_list(text)?)?)
    }
}

fn parse_set(space: &CylSpace, topo: Option<&Topologization>, text: &str) -> Run<PointSet> {
    let t = text.trim();
    if let Some(inner) = t.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        let pts = parse_list(inner)?;
        if let Some(&p) = pts.iter().find(|&&p| p >= space.point_count()) {
            return Err(Failure::Analysis(CylError::ElementOutOfRange {
                element: p,
                size: space.point_count(),
            }));
        }
        return Ok(PointSet::from_points(space.point_count(), pts));
    }
    let topo = topo.ok_or_else(|| Failure::Usage("formulas need a structure input".into()))?;
    let f = parse_formula(t, &topo.structure().signature())?;
    Ok(topo.interpret(&f)?)
}

fn parse_point(space: &CylSpace, text: &str) -> Run<usize> {
    if let Ok(p) = text.trim().parse::<usize>() {
        if p < space.point_count() {
            return Ok(p);
        }
    }
    (0..space.point_count())
        .find(|&p| space.label(p) == text.trim())
        .ok_or_else(|| Failure::Usage(format!("no point `{text}`")))
}

fn render(ctx: &mut Ctx, file: &Path, max_blocks: usize) -> Run<()> {
    let (space, _) = load_space(ctx, file)?;
    ctx.out.output.extend(
        render_space(&space, max_blocks)?
            .lines()
            .map(str::to_string),
    );
    Ok(())
}

fn check_space(ctx: &mut Ctx, file: &Path) -> Run<()> {
    let (space, _) = load_space(ctx, file)?;
    ctx.count("points", space.point_count());
    ctx.count("dim", space.dim());
    ctx.count("basis_blocks", space.blocks().block_count());
    let subst = SubstOptions {
        seed: ctx.seed,
        ..SubstOptions::default()
    };
    let points = PointLawOptions {
        seed: ctx.seed,
        ..PointLawOptions::default()
    };
    let (a, s, p) = if ctx.parallel {
        ctx.timed("suites", || {
            std::thread::scope(|sc| {
                let a = sc.spawn(|| check_space_axioms(&space));
                let s = sc.spawn(|| verify_substitution_laws(&space, &subst));
                let p = sc.spawn(|| verify_point_laws(&space, &points));
                (a.join().unwrap(), s.join().unwrap(), p.join().unwrap())
            })
        })
    } else {
        let a = ctx.timed("axioms", || check_space_axioms(&space));
        let s = ctx.timed("substitution", || verify_substitution_laws(&space, &subst));
        let p = ctx.timed("points", || verify_point_laws(&space, &points));
        (a, s, p)
    };
    ctx.report(a);
    ctx.report(s);
    ctx.report(p);
    Ok(())
}

fn eval(ctx: &mut Ctx, file: &Path, formula: &str) -> Run<()> {
    let (space, topo) = load_space(ctx, file)?;
    let u = parse_set(&space, topo.as_ref(), formula)?;
    ctx.count("satisfying", u.count());
    for p in u.iter() {
        ctx.line(space.label(p));
    }
    Ok(())
}

fn subst(ctx: &mut Ctx, file: &Path, set: &str, i: usize, j: usize) -> Run<()> {
    let (space, topo) = load_space(ctx, file)?;
    let u = parse_set(&space, topo.as_ref(), set)?;
    let v = space.subst(&u, i, j)?;
    ctx.line(format!("u = {}", space.show_set(&u)));
    ctx.line(format!("u({i}/{j}) = {}", space.show_set(&v)));
    ctx.count("result_points", v.count());
    Ok(())
}

fn perm(ctx: &mut Ctx, file: &Path, map: &str, set: Option<&str>, point: Option<&str>) -> Run<()> {
    let (space, topo) = load_space(ctx, file)?;
    let rho = parse_map(space.dim(), map)?;
    match (set, point) {
        (Some(s), None) => {
            let u = parse_set(&space, topo.as_ref(), s)?;
            let v = space.permute_set(&u, &rho)?;
            ctx.line(format!("ρ = {rho}"));
            ctx.line(format!("ρu = {}", space.show_set(&v)));
            ctx.count("result_points", v.count());
        }
        (None, Some(p)) => {
            let a = parse_point(&space, p)?;
            let rel = PointRelations::new(&space);
            let b = rel.permute_point(&rho, a)?;
            ctx.line(format!("ρ = {rho}"));
            ctx.line(format!("ρ{{{}}} = {}", space.label(a), space.label(b)));
        }
        _ => {
            return Err(Failure::Usage(
                "give exactly one of --set and --point".into(),
            ))
        }
    }
    Ok(())
}

fn load_catalog(files: &[PathBuf]) -> Run<Vec<FiniteStructure>> {
    if files.is_empty() {
        return Err(Failure::Usage("no structure files".into()));
    }
    files.iter().map(|f| load_structure(f)).collect()
}

fn embed(
    ctx: &mut Ctx,
    files: &[PathBuf],
    partial: Option<&str>,
    from: usize,
    to: Option<usize>,
) -> Run<()> {
    let catalog = load_catalog(files)?;
    let to = to.unwrap_or(if catalog.len() > 1 { 1 } else { 0 });
    if from >= catalog.len() || to >= catalog.len() {
        return Err(Failure::Usage(format!(
            "members {from} and {to} of a {}-structure catalog",
            catalog.len()
        )));
    }
    let n = ctx.budget()?;
    let limit = ctx.limit;
    let ms = ctx.timed("build", || build_model_space(&catalog, n, limit))?;
    let pick = |k: usize| {
        ms.domain_image(k).first().ok_or_else(|| {
            Failure::Analysis(CylError::Invalid(format!(
                "{} has no domain point at n={n}",
                catalog[k].name
            )))
        })
    };
    let (a, b) = (pick(from)?, pick(to)?);
    ctx.line(format!(
        "a = {} ({}), b = {} ({})",
        ms.space().label(a),
        catalog[from].name,
        ms.space().label(b),
        catalog[to].name
    ));
    ctx.line("finite structures: elementary embeddings are isomorphisms");
    let v = match partial {
        None => ms.decide_embedding(a, b)?,
        Some(text) => {
            ms.decide_partial_embedding(a, b, &parse_pairs(text)?.into_iter().collect())?
        }
    };
    ctx.line(format!("topological: {}", v.topological));
    if let Some(w) = &v.witness {
        ctx.line(format!(
            "witness ρ = {} (equivalence side condition: {})",
            w.rho, w.equivalence
        ));
    }
    ctx.line(format!("oracle: {}", v.oracle));
    ctx.out.results.push(LawResult::verdict(
        "embedding verdict agrees with the isomorphism oracle",
        v.agree,
        format!("topological {} vs oracle {}", v.topological, v.oracle),
    ));
    Ok(())
}

fn expand(ctx: &mut Ctx, file: &Path, alpha: usize) -> Run<()> {
    let (base, _) = load_space(ctx, file)?;
    let ec = ctx.timed("context", || ExpansionContext::new(&base, alpha))?;
    let e = ctx.timed("atoms", || {
        build_expansion(&ec, ExpansionOrder::Lexicographic)
    })?;
    ctx.count("atoms", e.atoms.len());
    ctx.count("maps", ec.maps().len());
    ctx.count("basis_sets", ec.sets().len());
    for (k, x) in e.atoms.iter().enumerate() {
        let pairs: Vec<String> = x
            .pairs()
            .into_iter()
            .map(|(m, u)| {
                let mu: Vec<String> = ec.maps()[m].iter().map(|i| i.to_string()).collect();
                format!("(({}),{})", mu.join(","), ec.base().show_set(&ec.sets()[u]))
            })
            .collect();
        ctx.line(format!("x{k}: {}", pairs.join(" ")));
    }
    ctx.report(check_space_axioms(&e.space));
    ctx.report(verify_expansion(&ec, &e));
    let other = build_expansion(&ec, ExpansionOrder::Seeded(ctx.seed))?;
    ctx.report(verify_expansion_uniqueness(&ec, &e, &other));
    match expansion_map(&ec, &e) {
        Ok(f) => {
            let m = classify_mapping(&e.space, ec.base(), &f)?;
            let ok = m.s_mapping && m.c_mapping && m.basis_preserving && m.surjective;
            ctx.out.results.push(LawResult::verdict(
                "expansion map is a basis-preserving C-surjection",
                ok,
                m.witnesses.join("; "),
            ));
            if alpha == base.dim() {
                let g = base_injection(&ec, &e)?;
                let h = classify_mapping(ec.base(), &e.space, &g)?;
                ctx.out.results.push(LawResult::verdict(
                    "base injection is a homeomorphism",
                    h.homeomorphism,
                    h.witnesses.join("; "),
                ));
            }
        }
        Err(CylError::NotT2(why)) => ctx.out.results.push(LawResult::skipped(
            "expansion map is a basis-preserving C-surjection",
            format!("base is not T2: {why}"),
        )),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn modelspace(ctx: &mut Ctx, files: &[PathBuf]) -> Run<()> {
    let catalog = load_catalog(files)?;
    let n = ctx.budget()?;
    let limit = ctx.limit;
    let ms = ctx.timed("build", || build_model_space(&catalog, n, limit))?;
    let space = ms.space();
    ctx.count("points", space.point_count());
    ctx.count("catalog", catalog.len());
    ctx.count("catalog_iso_classes", ms.catalog_iso_classes());
    let axioms = ctx_timed_axioms(ctx, space);
    ctx.report(axioms);
    let rel = PointRelations::new(space);
    for (k, a) in catalog.iter().enumerate() {
        let image = ms.domain_image(k);
        ctx.line(format!(
            "{}: canonical image {} points, domain image {}",
            a.name,
            distinct(ms.canonical_map(k)),
            space.show_set(&image)
        ));
        match ms.count_canonical_maps(k)? {
            Some(c) => ctx.out.results.push(LawResult::verdict(
                &format!("canonical map of {} is unique", a.name),
                c == 1,
                format!("{c} formation-preserving basis-preserving C-maps"),
            )),
            None => ctx.out.results.push(LawResult::skipped(
                &format!("canonical map of {} is unique", a.name),
                "more than 16 source points",
            )),
        }
        let Some(first) = image.first() else {
            ctx.out.results.push(LawResult::skipped(
                &format!("domain image of {} is one ≍-class", a.name),
                format!("n={n} is below the domain size"),
            ));
            continue;
        };
        let mut one_class = true;
        for c in image.iter() {
            one_class &= rel.equivalent(first, c)?;
        }
        ctx.out.results.push(LawResult::verdict(
            &format!("domain image of {} is one ≍-class", a.name),
            one_class,
            space.show_set(&image),
        ));
        let rep = ms.represent_model_point(first)?;
        let iso = pinned_isomorphism(&rep, a, &BTreeMap::new())?.is_some();
        ctx.out.results.push(LawResult::verdict(
            &format!("{} is represented by its domain points", a.name),
            iso,
            rep.to_text(),
        ));
    }
    match ms.count_iso_classes() {
        Ok(c) => {
            let oracle = (0..catalog.len())
                .filter(|&k| ms.representative(k) == k && catalog[k].domain_size() == n)
                .count();
            ctx.count("big_model_point_classes", c);
            ctx.out.results.push(LawResult::verdict(
                "≍-classes of big model points = catalog classes of size n",
                c == oracle,
                format!("{c} vs {oracle}"),
            ));
        }
        Err(CylError::Invalid(why)) => ctx
            .out
            .results
            .push(LawResult::skipped("≍-classes of big model points", why)),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn ctx_timed_axioms(ctx: &mut Ctx, space: &CylSpace) -> Report {
    ctx.timed("axioms", || check_space_axioms(space))
}

fn distinct(f: &[usize]) -> usize {
    let mut v = f.to_vec();
    v.sort();
    v.dedup();
    v.len()
}

fn typespace(ctx: &mut Ctx, file: &Path, k: usize, params: &str) -> Run<()> {
    let a = load_structure(file)?;
    let params = parse_list(params)?;
    let ts = type_space(&a, k, &params)?;
    ctx.count("types", ts.types.len());
    for (t, ty) in ts.types.iter().enumerate() {
        let members: Vec<String> = ty.iter().map(|x| format!("{x:?}")).collect();
        ctx.line(format!("p{t}: {}", members.join(" ")));
    }
    let n = ctx.n.unwrap_or(k + params.len());
    let limit = ctx.limit;
    let ms = ctx.timed("model space", || {
        build_model_space(std::slice::from_ref(&a), n, limit)
    })?;
    let pins: Vec<usize> = (k..k + params.len()).collect();
    let e = type_space_embedding(&ms, 0, k, &params, &pins)?;
    ctx.count("blocks", e.blocks.len());
    ctx.line(format!(
        "complete closed set {}",
        ms.space().show_set(&e.set)
    ));
    ctx.report(e.report);
    Ok(())
}

fn dispatch(ctx: &mut Ctx, cmd: &Command) -> Run<()> {
    match cmd {
        Command::Render { file, max_blocks } => render(ctx, file, *max_blocks),
        Command::CheckSpace { file } => check_space(ctx, file),
        Command::Eval { file, formula } => eval(ctx, file, formula),
        Command::Subst { file, set, i, j } => subst(ctx, file, set, *i, *j),
        Command::Perm {
            file,
            map,
            set,
            point,
        } => perm(ctx, file, map, set.as_deref(), point.as_deref()),
        Command::Embed {
            files,
            partial,
            from,
            to,
        } => embed(ctx, files, partial.as_deref(), *from, *to),
        Command::Expand { file, alpha } => expand(ctx, file, *alpha),
        Command::Modelspace { files } => modelspace(ctx, files),
        Command::Typespace { file, k, params } => typespace(ctx, file, *k, params),
    }
}

fn describe(cmd: &Command) -> (&'static str, BTreeMap<String, String>) {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    let files = |f: &[PathBuf]| {
        f.iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let name = match cmd {
        Command::Render { file, max_blocks } => {
            put("file", file.display().to_string());
            put("max_blocks", max_blocks.to_string());
            "render"
        }
        Command::CheckSpace { file } => {
            put("file", file.display().to_string());
            "check-space"
        }
        Command::Eval { file, formula } => {
            put("file", file.display().to_string());
            put("formula", formula.clone());
            "eval"
        }
        Command::Subst { file, set, i, j } => {
            put("file", file.display().to_string());
            put("set", set.clone());
            put("i", i.to_string());
            put("j", j.to_string());
            "subst"
        }
        Command::Perm {
            file,
            map,
            set,
            point,
        } => {
            put("file", file.display().to_string());
            put("map", map.clone());
            if let Some(s) = set {
                put("set", s.clone());
            }
            if let Some(p) = point {
                put("point", p.clone());
            }
            "perm"
        }
        Command::Embed {
            files: f,
            partial,
            from,
            to,
        } => {
            put("files", files(f));
            put("from", from.to_string());
            if let Some(t) = to {
                put("to", t.to_string());
            }
            if let Some(p) = partial {
                put("partial", p.clone());
            }
            "embed"
        }
        Command::Expand { file, alpha } => {
            put("file", file.display().to_string());
            put("alpha", alpha.to_string());
            "expand"
        }
        Command::Modelspace { files: f } => {
            put("files", files(f));
            "modelspace"
        }
        Command::Typespace { file, k, params } => {
            put("file", file.display().to_string());
            put("k", k.to_string());
            put("params", params.clone());
            "typespace"
        }
    };
    (name, m)
}

fn print_text(out: &Output) {
    if out.command == "render" {
        for line in &out.output {
            println!("{line}");
        }
        return;
    }
    println!("{}", out.command);
    for (k, v) in &out.inputs {
        println!("  {k} = {v}");
    }
    for line in &out.output {
        println!("{line}");
    }
    for (k, v) in &out.counters {
        println!("{k}: {v}");
    }
    let report = Report {
        results: out.results.clone(),
    };
    if !report.results.is_empty() {
        print!("{}", report.to_text());
    }
    for (k, v) in &out.timings_ms {
        println!("time {k}: {v} ms");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, inputs) = describe(&cli.command);
    let mut inputs = inputs;
    if let Some(n) = cli.n {
        inputs.insert("n".into(), n.to_string());
    }
    inputs.insert("seed".into(), cli.seed.to_string());
    let mut ctx = Ctx {
        n: cli.n,
        limit: cli.limit,
        seed: cli.seed,
        parallel: cli.parallel,
        timings: cli.timings,
        out: Output {
            command: name.to_string(),
            inputs,
            ..Output::default()
        },
    };
    let result = dispatch(&mut ctx, &cli.command);
    let code = match result {
        Ok(()) => {
            if ctx.out.results.iter().any(|r| r.status == Status::Fail) {
                1
            } else {
                0
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Analysis(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(if matches!(e, CylError::Resource { .. }) {
                3
            } else {
                1
            });
        }
    };
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&ctx.out).expect("report serializes")
        );
    } else {
        print_text(&ctx.out);
    }
    ExitCode::from(code)
}
