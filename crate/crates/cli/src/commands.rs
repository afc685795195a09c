use std::path::Path;

use nilkit::cocycle::{derivative, is_cocycle, solve_functional, Cocycle as CocycleValues, GroupValuedFunction};
use nilkit::constructions::{dynamical_cubespace, hk_nilspace, standard_nilspace, GroupAction};
use nilkit::corpus::{self, CorpusItem};
use nilkit::cubespace::{check_ergodic, check_glueing, nilspace_degree, FiniteCubespace, Outcome};
use nilkit::dynamics::{rp_quotient, DynamicalSystem};
use nilkit::factors::{canonical_relation, canonical_tower, quotient_cubespace, structure_group, verify_weak_structure};
use nilkit::fibrations::{check_fibration, classify, decompose, CubespaceMap};
use nilkit::format::{decode, encode, FiltrationFile, Kind, Provenance};
use nilkit::group::{abelian_invariants, lower_central_series, subgroup_closure, Elem, FiniteAbelianGroup, FiniteGroup};
use nilkit::translations::{aut_filtration, is_translation, translation_group};
use nilkit::verdict::Verdict;
use nilkit::{guard, Error};
use rand::{Rng, SeedableRng};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::config::{resolve, FileConfig, Settings};
use crate::{Build, Cli, Cocycle, Command, Corpus, Factor, Fibration, Rp, Translations, Verify};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_GUARD: u8 = 3;

pub struct Failure {
    pub exit: u8,
    pub code: String,
    pub message: String,
}

impl Failure {
    fn input(cmd: &str, what: &str, message: String) -> Self {
        Failure { exit: EXIT_INPUT, code: format!("{cmd}.{what}"), message }
    }

    fn from_error(cmd: &str, e: &Error) -> Self {
        let exit = if e.is_guard() {
            EXIT_GUARD
        } else if e.is_input() {
            EXIT_INPUT
        } else {
            EXIT_CHECK_FAILED
        };
        Failure { exit, code: format!("{cmd}.{}", e.code()), message: e.to_string() }
    }
}

/// Artifact text and whether every requested check passed.
type Output = (String, bool);

struct Ctx<'a> {
    cmd: &'static str,
    settings: &'a Settings,
}

impl Ctx<'_> {
    fn err(&self, e: Error) -> Failure {
        Failure::from_error(self.cmd, &e)
    }

    fn load<T: DeserializeOwned>(&self, kind: Kind, path: &Path) -> Result<T, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(self.cmd, "io", format!("{}: {e}", path.display())))?;
        decode(kind, &text).map_err(|e| Failure::input(self.cmd, "format", format!("{}: {e}", path.display())))
    }

    /// A cubespace file, cut down to --lmax when that is lower.
    fn load_space(&self, path: &Path) -> Result<FiniteCubespace, Failure> {
        let x: FiniteCubespace = self.load(Kind::Cubespace, path)?;
        Ok(match self.settings.lmax {
            Some(l) if l < x.lmax() => x.truncate(l),
            _ => x,
        })
    }

    fn encode<T: serde::Serialize>(&self, kind: Kind, v: &T, p: Option<Provenance>) -> Result<String, Failure> {
        encode(kind, v, p).map_err(|e| self.err(e))
    }

    fn certificate(&self, body: Value) -> Result<String, Failure> {
        self.encode(Kind::Certificate, &body, None)
    }
}

fn verdict_json(v: &Verdict) -> Value {
    serde_json::to_value(v).expect("verdicts serialize")
}

pub fn run(cli: Cli) -> u8 {
    let cmd = command_name(&cli.command);
    let file = match cli.global.config.as_deref().map(FileConfig::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(m) => return report(Failure::input(cmd, "config", m)),
    };
    let settings = match resolve(cli.global.lmax, cli.global.guard, cli.global.seed, &file) {
        Ok(s) => s,
        Err(m) => return report(Failure::input(cmd, "config", m)),
    };
    if let Some(g) = settings.guard {
        guard::set_global(g);
    }
    let ctx = Ctx { cmd, settings: &settings };
    let result = match &cli.command {
        Command::Build(b) => build(&ctx, b),
        Command::Verify(v) => verify(&ctx, v),
        Command::Factor(f) => factor(&ctx, f),
        Command::Fibration(f) => fibration(&ctx, f),
        Command::Cocycle(c) => cocycle(&ctx, c),
        Command::Translations(t) => translations(&ctx, t),
        Command::Rp(r) => rp(&ctx, r),
        Command::Corpus(c) => corpus_cmd(&ctx, c),
    };
    match result {
        Ok((text, passed)) => {
            let written = match &cli.global.out {
                Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Err(m) => report(Failure::input(cmd, "io", m)),
                Ok(()) if passed => EXIT_OK,
                Ok(()) => EXIT_CHECK_FAILED,
            }
        }
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> u8 {
    eprintln!("error[{}]: {}", f.code, f.message);
    f.exit
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Build(_) => "build",
        Command::Verify(_) => "verify",
        Command::Factor(_) => "factor",
        Command::Fibration(_) => "fibration",
        Command::Cocycle(_) => "cocycle",
        Command::Translations(_) => "translations",
        Command::Rp(_) => "rp",
        Command::Corpus(_) => "corpus",
    }
}

fn build(ctx: &Ctx, b: &Build) -> Result<Output, Failure> {
    let lmax = ctx.settings.lmax;
    let (space, prov) = match b {
        Build::Hk { group, filtration, gamma } => {
            let g: FiniteGroup = ctx.load(Kind::Group, group)?;
            let f = if filtration == "lcs" {
                lower_central_series(&g).map_err(|e| ctx.err(e))?
            } else {
                let file: FiltrationFile = ctx.load(Kind::Filtration, Path::new(filtration))?;
                if file.group != g {
                    return Err(Failure::input(ctx.cmd, "filtration", "filtration is over a different group".into()));
                }
                file.to_filtration().map_err(|e| ctx.err(e))?
            };
            let gens: Vec<Elem> = if gamma == "trivial" {
                Vec::new()
            } else {
                gamma
                    .split(',')
                    .map(|t| t.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| Failure::input(ctx.cmd, "gamma", format!("cannot read {gamma}")))?
            };
            let gamma_sub = subgroup_closure(&g, &gens).map_err(|e| ctx.err(e))?;
            let l = lmax.unwrap_or(f.degree() + 1);
            let hk = hk_nilspace(&g, &f, &gamma_sub, l).map_err(|e| ctx.err(e))?;
            let params = json!({"group_order": g.order(), "filtration": filtration, "gamma": gens, "lmax": l});
            (hk.space, Provenance::new("hk", params))
        }
        Build::Ds { factors, abelian, degree } => {
            let a = match (factors, abelian) {
                (Some(fs), _) => FiniteAbelianGroup::product(fs),
                (None, Some(p)) => {
                    let g: FiniteGroup = ctx.load(Kind::Group, p)?;
                    abelian_invariants(&g).map_err(|e| ctx.err(e))?
                }
                (None, None) => return Err(Failure::input(ctx.cmd, "args", "give --factors or --abelian".into())),
            };
            let l = lmax.unwrap_or(degree + 2);
            let x = standard_nilspace(&a, *degree, l).map_err(|e| ctx.err(e))?;
            (x, Provenance::new("ds", json!({"factors": a.factors(), "degree": degree, "lmax": l})))
        }
        Build::Dynamical { action } => {
            let act: GroupAction = ctx.load(Kind::Action, action)?;
            let l = lmax.unwrap_or(2);
            let x = dynamical_cubespace(&act, l).map_err(|e| ctx.err(e))?;
            (x, Provenance::new("dynamical", json!({"group_order": act.group().order(), "points": act.points(), "lmax": l})))
        }
        Build::Full { points } => {
            let l = lmax.unwrap_or(2);
            let x = FiniteCubespace::full(*points, l).map_err(|e| ctx.err(e))?;
            (x, Provenance::new("full", json!({"points": points, "lmax": l})))
        }
    };
    Ok((ctx.encode(Kind::Cubespace, &space, Some(prov))?, true))
}

fn verify(ctx: &Ctx, v: &Verify) -> Result<Output, Failure> {
    let x = ctx.load_space(&v.input)?;
    let default = !v.glueing && !v.weak_structure && v.ergodic.is_none();
    let mut checks = serde_json::Map::new();
    let mut passed = true;
    let mut degree = None;
    if v.nilspace || default || v.weak_structure {
        let cert = nilspace_degree(&x).map_err(|e| ctx.err(e))?;
        degree = cert.degree();
        passed &= matches!(cert.outcome, Outcome::Nilspace { .. });
        checks.insert("nilspace".into(), serde_json::to_value(&cert).expect("serializable"));
    }
    if let Some(s) = v.ergodic {
        let e = check_ergodic(&x, s).map_err(|e| ctx.err(e))?;
        passed &= e.passed();
        checks.insert("ergodic".into(), json!({"s": s, "verdict": verdict_json(&e)}));
    }
    if v.glueing {
        let g = check_glueing(&x, x.lmax()).map_err(|e| ctx.err(e))?;
        passed &= g.passed();
        checks.insert("glueing".into(), json!({"up_to": x.lmax(), "verdict": verdict_json(&g)}));
    }
    if v.weak_structure {
        let entry = match degree {
            Some(s) if s >= 1 && s < x.lmax() => {
                let sg = structure_group(&x, s).map_err(|e| ctx.err(e))?;
                let cert = verify_weak_structure(&x, &sg).map_err(|e| ctx.err(e))?;
                passed &= cert.passed();
                json!({
                    "structure_group": sg.group.factors(),
                    "passed": cert.passed(),
                    "certificate": cert,
                })
            }
            _ => {
                passed = false;
                json!({"passed": false, "reason": "needs a nilspace of degree s ≥ 1 with ℓmax > s"})
            }
        };
        checks.insert("weak_structure".into(), entry);
    }
    let body = json!({
        "command": "verify",
        "input": v.input.display().to_string(),
        "points": x.points(),
        "lmax": x.lmax(),
        "checks": checks,
        "passed": passed,
    });
    Ok((ctx.certificate(body)?, passed))
}

fn factor(ctx: &Ctx, f: &Factor) -> Result<Output, Failure> {
    let x = ctx.load_space(&f.input)?;
    if let Some(s) = f.quotient {
        let r = canonical_relation(&x, s).map_err(|e| ctx.err(e))?;
        let (q, _) = quotient_cubespace(&x, &r).map_err(|e| ctx.err(e))?;
        let prov = Provenance::new("canonical-factor", json!({"s": s, "input": f.input.display().to_string()}));
        return Ok((ctx.encode(Kind::Cubespace, &q, Some(prov))?, true));
    }
    if let Some(s) = f.relation {
        let r = canonical_relation(&x, s).map_err(|e| ctx.err(e))?;
        return Ok((ctx.encode(Kind::Relation, &r, None)?, true));
    }
    if let Some(s) = f.structure_group {
        let sg = structure_group(&x, s).map_err(|e| ctx.err(e))?;
        let ok = sg.free.passed() && sg.orbits_are_fibers.passed();
        let body = json!({
            "command": "factor",
            "structure_group": {"degree": s, "factors": sg.group.factors(), "order": sg.group.order()},
            "action": sg.action,
            "fibers": sg.fibers.labels(),
            "free": verdict_json(&sg.free),
            "orbits_are_fibers": verdict_json(&sg.orbits_are_fibers),
            "passed": ok,
        });
        return Ok((ctx.certificate(body)?, ok));
    }
    let tower = canonical_tower(&x).map_err(|e| ctx.err(e))?;
    let passed = tower.iter().all(|t| t.fibration.passed());
    let levels: Vec<Value> = tower
        .iter()
        .map(|t| {
            json!({
                "level": t.level,
                "points": t.space.points(),
                "projection": t.projection.map(),
                "fibration": verdict_json(&t.fibration),
            })
        })
        .collect();
    let body = json!({"command": "factor", "tower": levels, "passed": passed});
    Ok((ctx.certificate(body)?, passed))
}

fn fibration(ctx: &Ctx, f: &Fibration) -> Result<Output, Failure> {
    let phi: CubespaceMap = ctx.load(Kind::Map, &f.map)?;
    let up_to = phi.source().lmax().min(phi.target().lmax());
    let check = check_fibration(&phi, up_to).map_err(|e| ctx.err(e))?;
    let mut body = json!({"command": "fibration", "fibration": verdict_json(&check), "up_to": up_to});
    let mut passed = check.passed();
    if let Some(s) = f.classify {
        let c = classify(&phi, s).map_err(|e| ctx.err(e))?;
        passed &= c.consistent;
        body["classification"] = serde_json::to_value(&c).expect("serializable");
    }
    if let Some(s) = f.decompose {
        let d = decompose(&phi, s).map_err(|e| ctx.err(e))?;
        body["decomposition"] = json!({
            "middle_points": d.middle.points(),
            "vertical": d.vertical.map(),
            "horizontal": d.horizontal.map(),
            "relation": d.relation.labels(),
        });
    }
    body["passed"] = json!(passed);
    Ok((ctx.certificate(body)?, passed))
}

fn count_json(c: u128) -> Value {
    u64::try_from(c).map(Value::from).unwrap_or_else(|_| Value::from(c.to_string()))
}

fn cocycle(ctx: &Ctx, c: &Cocycle) -> Result<Output, Failure> {
    match c {
        Cocycle::Derivative { space, function, level } => {
            let x = ctx.load_space(space)?;
            let f: GroupValuedFunction = ctx.load(Kind::Function, function)?;
            let d = derivative(&x, &f, *level).map_err(|e| ctx.err(e))?;
            Ok((ctx.encode(Kind::Cocycle, &d, None)?, true))
        }
        Cocycle::Random { space, factors, level } => {
            let x = ctx.load_space(space)?;
            let a = FiniteAbelianGroup::product(factors);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ctx.settings.seed);
            let values = (0..x.points()).map(|_| rng.gen_range(0..a.order() as Elem)).collect();
            let g = GroupValuedFunction::new(a, values).map_err(|e| ctx.err(e))?;
            let d = derivative(&x, &g, *level).map_err(|e| ctx.err(e))?;
            let prov = Provenance::new("random-coboundary", json!({"seed": ctx.settings.seed, "g": g.values}));
            Ok((ctx.encode(Kind::Cocycle, &d, Some(prov))?, true))
        }
        Cocycle::Check { space, cocycle } => {
            let x = ctx.load_space(space)?;
            let rho: CocycleValues = ctx.load(Kind::Cocycle, cocycle)?;
            let rho = CocycleValues::new(&x, rho.level, rho.group, rho.values).map_err(|e| ctx.err(e))?;
            let v = is_cocycle(&x, &rho).map_err(|e| ctx.err(e))?;
            let body = json!({"command": "cocycle", "cocycle": verdict_json(&v), "passed": v.passed()});
            Ok((ctx.certificate(body)?, v.passed()))
        }
        Cocycle::Solve { map, cocycle } => {
            let phi: CubespaceMap = ctx.load(Kind::Map, map)?;
            let rho: CocycleValues = ctx.load(Kind::Cocycle, cocycle)?;
            let rho = CocycleValues::new(phi.source(), rho.level, rho.group, rho.values).map_err(|e| ctx.err(e))?;
            match solve_functional(&phi, &rho) {
                Ok(sol) => {
                    let body = json!({
                        "command": "cocycle",
                        "f": sol.f,
                        "rho_tilde": sol.rho_tilde,
                        "rho_tilde_is_cocycle": verdict_json(&sol.rho_tilde_is_cocycle),
                        "kernel_generators": sol.kernel.len(),
                        "solution_count": count_json(sol.solution_count),
                        "passed": true,
                    });
                    Ok((ctx.certificate(body)?, true))
                }
                Err(Error::Infeasible { reason, equations }) => {
                    let body = json!({
                        "command": "cocycle",
                        "infeasible": {"reason": reason, "equations": equations},
                        "passed": false,
                    });
                    Ok((ctx.certificate(body)?, false))
                }
                Err(e) => Err(ctx.err(e)),
            }
        }
    }
}

fn translations(ctx: &Ctx, t: &Translations) -> Result<Output, Failure> {
    let x = ctx.load_space(&t.input)?;
    if let Some(map) = &t.check {
        let v = is_translation(&x, map, t.level, x.lmax()).map_err(|e| ctx.err(e))?;
        let body = json!({"command": "translations", "level": t.level, "verdict": verdict_json(&v), "passed": v.passed()});
        return Ok((ctx.certificate(body)?, v.passed()));
    }
    if t.filtration {
        let aut = aut_filtration(&x).map_err(|e| ctx.err(e))?;
        let passed = aut.nested.passed() && aut.commutators.passed();
        let groups: Vec<Value> = aut
            .groups
            .iter()
            .map(|g| json!({"level": g.level, "order": g.order(), "elements": g.elements}))
            .collect();
        let body = json!({
            "command": "translations",
            "groups": groups,
            "nested": verdict_json(&aut.nested),
            "commutators": verdict_json(&aut.commutators),
            "passed": passed,
        });
        return Ok((ctx.certificate(body)?, passed));
    }
    let g = translation_group(&x, t.level).map_err(|e| ctx.err(e))?;
    let body = json!({
        "command": "translations",
        "level": g.level,
        "order": g.order(),
        "exhaustive": g.exhaustive,
        "elements": g.elements,
        "passed": true,
    });
    Ok((ctx.certificate(body)?, true))
}

fn rp(ctx: &Ctx, r: &Rp) -> Result<Output, Failure> {
    let act: GroupAction = ctx.load(Kind::Action, &r.action)?;
    let sys = DynamicalSystem::new(act, ctx.settings.lmax.unwrap_or(r.s + 1).max(r.s + 1));
    if !r.quotient {
        let x = sys.cubespace().map_err(|e| ctx.err(e))?;
        let rel = nilkit::constructions::rp_relation(sys.action(), r.s, Some(x.cubes(r.s + 1))).map_err(|e| ctx.err(e))?;
        return Ok((ctx.encode(Kind::Relation, &rel, None)?, true));
    }
    let q = rp_quotient(&sys, r.s).map_err(|e| ctx.err(e))?;
    let passed = q.degree_at_most_s.passed() && q.ergodic.passed() && q.translations.passed();
    let body = json!({
        "command": "rp",
        "s": r.s,
        "classes": q.relation.labels(),
        "quotient_points": q.space.points(),
        "degree": q.degree,
        "degree_at_most_s": verdict_json(&q.degree_at_most_s),
        "ergodic": verdict_json(&q.ergodic),
        "translations": verdict_json(&q.translations),
        "passed": passed,
    });
    Ok((ctx.certificate(body)?, passed))
}

fn corpus_cmd(ctx: &Ctx, c: &Corpus) -> Result<Output, Failure> {
    match c {
        Corpus::List => {
            let mut text = String::new();
            for (name, what) in corpus::NAMES {
                text.push_str(&format!("{name}\t{what}\n"));
            }
            Ok((text, true))
        }
        Corpus::Get { name } => {
            let item = corpus::instance(name, ctx.settings.lmax).map_err(|e| ctx.err(e))?;
            let prov = Some(Provenance::new("corpus", json!({"name": name, "lmax": ctx.settings.lmax})));
            let text = match &item {
                CorpusItem::Cubespace(x) => ctx.encode(Kind::Cubespace, x, prov)?,
                CorpusItem::Map(m) => ctx.encode(Kind::Map, m, prov)?,
                CorpusItem::Action(a) => ctx.encode(Kind::Action, a, prov)?,
            };
            Ok((text, true))
        }
    }
}
