use serde_json::{json, Value};

use qfol_core::affpseudo::OrbitVerdict;
use qfol_core::hector::{build_suspension, CaseStatus, SuspensionComplex};
use qfol_core::localmodel::{build_local_model, effective_quotient, isotropy_and_charts, Presentation};
use qfol_core::oracle::{closure_dim_report, orbit_bfs, OracleOrbit, ShadowContext};
use qfol_core::quasifold::{quotient_point_equal, structural_pseudogroup, Equivariance, QuasifoldError};
use qfol_core::torusfol::{deck_group, point_same_leaf, rational_hull, LeafRelation};

use crate::input::{InputError, Problem};
use crate::report::{integers, rational, rational_str, word, Fmt};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_WITHIN_BOUND: i32 = 2;

const CLOSURE_SAMPLES: usize = 100_000;
const AXIOM_POINTS: usize = 25;

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub wordlen: usize,
    pub tolerance: f64,
    pub seed: u64,
}

pub struct Outcome {
    pub results: Value,
    pub verdict: String,
    pub numeric: Option<Value>,
    pub exit: i32,
}

impl Outcome {
    fn new(results: Value, verdict: &str) -> Self {
        Outcome { results, verdict: verdict.into(), numeric: None, exit: EXIT_OK }
    }
}

fn invalid(at: &str, e: impl ToString) -> InputError {
    InputError::Invalid { at: at.into(), message: e.to_string() }
}

fn shadow_context(p: &Problem, o: &Options) -> Option<ShadowContext> {
    ShadowContext::new(p.table.clone(), o.tolerance, o.seed).ok()
}

fn generator_names(prefix: &'static str) -> impl Fn(usize) -> String {
    move |i| format!("{prefix}{}", i + 1)
}

pub fn closure(p: &Problem, o: &Options) -> Result<Outcome, InputError> {
    let f = Fmt { table: &p.table };
    let spec = p.foliation()?;
    let rep = rational_hull(&spec);
    let results = json!({
        "n": spec.n(),
        "p": spec.p(),
        "directions": f.vectors(spec.directions()),
        "hull_basis": rep.hull_basis.iter().map(|r| Value::Array(r.iter().map(rational).collect())).collect::<Vec<_>>(),
        "closure_dim": rep.closure_dim,
        "structure_dim": rep.structure_dim,
        "dense": rep.dense,
    });
    let mut out = Outcome::new(results, if rep.dense { "dense" } else { "not_dense" });
    if let Some(ctx) = shadow_context(p, o) {
        let est = closure_dim_report(&spec, &ctx, CLOSURE_SAMPLES).map_err(|e| invalid("symbol", e))?;
        out.numeric = Some(json!({
            "closure_dim_estimate": est.estimate,
            "box_counts": est.counts,
            "resolutions": ["1/8", "1/16", "1/32"],
            "slopes": est.slopes,
            "stable": est.stable,
            "samples": CLOSURE_SAMPLES,
        }));
    }
    Ok(out)
}

pub fn deckgroup(p: &Problem, _o: &Options) -> Result<Outcome, InputError> {
    let f = Fmt { table: &p.table };
    let spec = p.foliation()?;
    let deck = deck_group(&spec);
    let results = json!({
        "complement_axes": deck.complement.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "generators": f.vectors(deck.group.generators()),
        "canonical_generators": f.vectors(&deck.group.canonical_generators()),
        "rank": deck.group.rank(),
        "relations": deck.group.relations().iter().map(|r| integers(r)).collect::<Vec<_>>(),
    });
    Ok(Outcome::new(results, "ok"))
}

pub fn leafspace(p: &Problem, _o: &Options) -> Result<Outcome, InputError> {
    let f = Fmt { table: &p.table };
    let spec = p.foliation()?;
    let deck = deck_group(&spec);
    let hull = rational_hull(&spec);
    let q = deck.group.dim();
    let canonical = deck.group.canonical_generators();
    let results = json!({
        "dimension": q,
        "complement_axes": deck.complement.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "gamma": canonical.iter().map(|g| f.point_string(g)).collect::<Vec<_>>(),
        "gamma_vectors": f.vectors(&canonical),
        "action": "translations",
        "cell": format!("R^{q}"),
        "closure": {
            "closure_dim": hull.closure_dim,
            "structure_dim": hull.structure_dim,
            "dense": hull.dense,
        },
    });
    Ok(Outcome::new(results, "quasifold_chart"))
}

pub fn sameleaf(p: &Problem, _o: &Options) -> Result<Outcome, InputError> {
    let f = Fmt { table: &p.table };
    let spec = p.foliation()?;
    let x = p.point("x", &p.raw.x)?;
    let y = p.point("y", &p.raw.y)?;
    for (name, v) in [("x", &x), ("y", &y)] {
        if v.len() != spec.n() {
            return Err(invalid(name, format!("expected {} entries", spec.n())));
        }
    }
    let rel = point_same_leaf(&spec, &x, &y);
    let diff: Vec<_> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
    let coefficients = deck_group(&spec).group.membership(&spec.project(&diff));
    let verdict = match rel {
        LeafRelation::SameLeaf => "same_leaf",
        LeafRelation::DifferentLeaf => "different_leaf",
    };
    let results = json!({
        "x": f.vector(&x),
        "y": f.vector(&y),
        "relation": verdict,
        "deck_coefficients": coefficients.map(|c| integers(&c)),
    });
    Ok(Outcome::new(results, verdict))
}

fn suspension(p: &Problem, o: &Options) -> Result<SuspensionComplex, InputError> {
    let order = p.order(o.tolerance);
    let gens = p.transitions(&order)?;
    build_suspension(gens).map_err(|e| invalid("generator", e))
}

pub fn suspend(p: &Problem, o: &Options) -> Result<Outcome, InputError> {
    let f = Fmt { table: &p.table };
    let c = suspension(p, o)?;
    let blocks: Vec<Value> = c
        .blocks()
        .iter()
        .map(|b| {
            json!({
                "name": b.name,
                "x_domain": f.cell(&b.x_domain),
                "s_range": b.s_range.as_ref().map(|(lo, hi)| vec![rational(lo), rational(hi)]),
                "t_range": [rational(&b.t_range.0), rational(&b.t_range.1)],
            })
        })
        .collect();
    let descriptors: Vec<Value> = c
        .descriptors
        .iter()
        .map(|d| {
            json!({
                "chart": d.chart.to_string(),
                "pieces": d.pieces.iter().map(|pc| json!({
                    "t": format!("({},{})", rational_str(&pc.t_lo), rational_str(&pc.t_hi)),
                    "strip": pc.strip.map(|k| k + 1),
                    "map": pc.map.to_string(),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let cocycle: Vec<Value> = c
        .cocycle
        .iter()
        .map(|e| json!({ "from": e.from.to_string(), "to": e.to.to_string(), "map": e.map.to_string() }))
        .collect();
    let holonomy: Vec<Value> = c
        .holonomy_generators()
        .iter()
        .map(|t| json!({ "map": f.affine_string(&t.map), "domain": f.cell(&t.domain) }))
        .collect();
    let results = json!({
        "q": c.dim(),
        "strips": c.strips(),
        "blocks": blocks,
        "glue": c.glue_rules(),
        "descriptors": descriptors,
        "cocycle": cocycle,
        "holonomy_generators": holonomy,
        "round_trip": c.holonomy_generators() == c.generators(),
        "riemannian": c.riemannian_flag(),
    });
    Ok(Outcome::new(results, "built"))
}

pub fn check_cocycle(p: &Problem, o: &Options) -> Result<Outcome, InputError> {
    let f = Fmt { table: &p.table };
    let c = suspension(p, o)?;
    let order = p.order(o.tolerance);
    let rep = c.verify_cocycle(&order).map_err(|e| invalid("generator", e))?;
    let cases: Vec<Value> = rep
        .cases
        .iter()
        .map(|k| {
            let (status, reason) = match &k.status {
                CaseStatus::Pass => ("pass", None),
                CaseStatus::Fail(r) => ("fail", Some(r.clone())),
            };
            json!({
                "strip": k.strip + 1,
                "t": k.t_cell.to_string(),
                "x_in_domain": k.flags.in_domain,
                "x_in_image": k.flags.in_image,
                "image_in_domain": k.flags.image_in_domain,
                "charts": k.charts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "inhabited": k.inhabited,
                "status": status,
                "reason": reason,
                "witness": k.witness.as_ref().map(|w| json!({
                    "x": f.vector(&w.x), "s": rational(&w.s), "t": rational(&w.t),
                })),
            })
        })
        .collect();
    let results = json!({
        "cases": cases,
        "cross_strip_equal": rep.cross_strip_equal,
        "passed": rep.passed,
    });
    Ok(Outcome::new(results, if rep.passed { "pass" } else { "fail" }))
}

pub fn check_godement(p: &Problem, o: &Options) -> Result<Outcome, InputError> {
    let c = suspension(p, o)?;
    let samples = p.raw.samples.unwrap_or(100);
    if samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    let order = p.order(o.tolerance);
    let rep = c.verify_godement(samples, o.seed, &order).map_err(|e| invalid("generator", e))?;
    let results = json!({
        "samples": rep.samples,
        "cases": rep.cases.iter().map(|k| json!({
            "case": k.case.name(),
            "sequences": k.sequences,
            "limits_in_v": k.limits_in_v,
            "failures": k.failures,
        })).collect::<Vec<_>>(),
        "graph_charts": rep.graph_charts.iter().map(|g| json!({
            "generator": g.generator + 1,
            "submersion": g.submersion,
        })).collect::<Vec<_>>(),
        "passed": rep.passed,
    });
    Ok(Outcome::new(results, if rep.passed { "pass" } else { "fail" }))
}

pub fn localmodel(p: &Problem, o: &Options) -> Result<Outcome, InputError> {
    let f = Fmt { table: &p.table };
    let order = p.order(o.tolerance);
    let gpd = build_local_model(&p.local_model()?).map_err(|e| invalid("model", e))?;
    let names = generator_names("t");
    let points = gpd.sample_points(AXIOM_POINTS, o.seed);
    let axioms = gpd.check_action_axioms(o.wordlen, &points);
    let blocks = gpd.check_block_invariance(o.wordlen);
    let isotropy = match &p.raw.point {
        Some(_) => {
            let x = p.point("point", &p.raw.point)?;
            if x.len() != gpd.carrier_dim() {
                return Err(invalid("point", format!("expected {} entries", gpd.carrier_dim())));
            }
            let (iso, verdict) =
                isotropy_and_charts(&gpd, &x, o.wordlen, &order).map_err(|e| invalid("point", e))?;
            Some(json!({
                "point": f.vector(&x),
                "elements": iso.iter().map(|e| word(&e.word, &names)).collect::<Vec<_>>(),
                "order": iso.len(),
                "block_affine": verdict.block_affine,
                "cell_invariant": verdict.cell_invariant,
            }))
        }
        None => None,
    };
    let results = json!({
        "r": gpd.r(),
        "d": gpd.d(),
        "presentation": match gpd.presentation() { Presentation::Free => "free", Presentation::FreeAbelian => "free-abelian" },
        "generators": gpd.group().generators().iter().map(|g| f.affine_string(g)).collect::<Vec<_>>(),
        "gamma": f.vectors(gpd.psi()),
        "action_axioms": {
            "radius": o.wordlen,
            "points": points.len(),
            "ball_size": axioms.ball_size,
            "checks": axioms.checks,
            "passed": axioms.passed(),
        },
        "block_invariance": {
            "radius": o.wordlen,
            "ball_size": blocks.ball_size,
            "passed": blocks.passed(),
        },
        "finite_order": gpd.finite_order(o.wordlen),
        "riemannian": gpd.group().generators().iter().all(|g| g.is_euclidean_isometry()),
        "isotropy": isotropy,
    });
    let ok = axioms.passed() && blocks.passed();
    Ok(Outcome::new(results, if ok { "affine_model" } else { "axiom_failure" }))
}

pub fn effective(p: &Problem, o: &Options) -> Result<Outcome, InputError> {
    let gpd = build_local_model(&p.local_model()?).map_err(|e| invalid("model", e))?;
    let names = generator_names("t");
    let rep = effective_quotient(&gpd, o.wordlen);
    let results = json!({
        "radius": rep.radius,
        "exact": rep.exact,
        "kernel_words": rep.kernel_words.iter().map(|w| word(w, &names)).collect::<Vec<_>>(),
        "kernel_lattice": rep.kernel_lattice.as_ref().map(|b| b.iter().map(|r| integers(r)).collect::<Vec<_>>()),
        "effective_generators": rep.effective_generators.iter().map(|&i| names(i)).collect::<Vec<_>>(),
    });
    let verdict = match (rep.is_trivial(), rep.exact) {
        (true, true) => "trivial_kernel",
        (true, false) => "no_kernel_within_bound",
        (false, _) => "nontrivial_kernel",
    };
    Ok(Outcome::new(results, verdict))
}

fn orbit_verdict(v: &OrbitVerdict, names: &dyn Fn(usize) -> String) -> (Value, &'static str, i32) {
    match v {
        OrbitVerdict::Equal { word: w } => (json!({ "word": word(w, names) }), "equal", EXIT_OK),
        OrbitVerdict::EqualExact { coefficients } => {
            (json!({ "coefficients": integers(coefficients) }), "equal", EXIT_OK)
        }
        OrbitVerdict::Unequal => (Value::Null, "unequal", EXIT_OK),
        OrbitVerdict::NotWithinBound => (Value::Null, "not_within_bound", EXIT_NOT_WITHIN_BOUND),
    }
}

pub fn orbit_eq(p: &Problem, o: &Options) -> Result<Outcome, InputError> {
    let f = Fmt { table: &p.table };
    let g = p.group()?;
    let x = p.point("x", &p.raw.x)?;
    let y = p.point("y", &p.raw.y)?;
    for (name, v) in [("x", &x), ("y", &y)] {
        if v.len() != g.dim() {
            return Err(invalid(name, format!("expected {} entries", g.dim())));
        }
    }
    let names = generator_names("g");
    let v = g.orbit_equal(&x, &y, o.wordlen);
    let (detail, verdict, exit) = orbit_verdict(&v, &names);
    let results = json!({
        "x": f.vector(&x),
        "y": f.vector(&y),
        "method": if g.is_translation_group() { "exact" } else { "bounded" },
        "radius": o.wordlen,
        "witness": detail,
    });
    let mut out = Outcome { results, verdict: verdict.into(), numeric: None, exit };
    if let Some(ctx) = shadow_context(p, o) {
        let bfs = orbit_bfs(&g, &x, &y, &ctx, o.wordlen).map_err(|e| invalid("symbol", e))?;
        out.numeric = Some(match bfs {
            OracleOrbit::Found(w) => json!({ "float_search": "found", "word": word(&w, &names) }),
            OracleOrbit::NotFound { near_misses } => {
                json!({ "float_search": "not_found", "near_misses": near_misses })
            }
        });
    }
    Ok(out)
}

pub fn atlas_pseudogroup(p: &Problem, o: &Options) -> Result<Outcome, InputError> {
    let f = Fmt { table: &p.table };
    let order = p.order(o.tolerance);
    let atlas = p.atlas(&order)?;
    // atlas moves: chart generators chart-major, then transitions
    let mut move_names = Vec::new();
    for (c, chart) in atlas.charts.iter().enumerate() {
        for i in 0..chart.group().generators().len() {
            move_names.push(format!("c{}g{}", c + 1, i + 1));
        }
    }
    for k in 0..atlas.transitions.len() {
        move_names.push(format!("psi{}", k + 1));
    }
    let move_name = |i: usize| move_names[i].clone();
    let transitions: Vec<Value> = (0..atlas.transitions.len())
        .map(|k| {
            let t = &atlas.transitions[k];
            let target_names = generator_names("g");
            match atlas.check_transition(k, o.wordlen) {
                Equivariance::Certified { witnesses } => json!({
                    "source": t.source + 1,
                    "target": t.target + 1,
                    "certified": true,
                    "witnesses": witnesses.iter().map(|e| word(&e.word, &target_names)).collect::<Vec<_>>(),
                }),
                Equivariance::Failed { generator } => json!({
                    "source": t.source + 1,
                    "target": t.target + 1,
                    "certified": false,
                    "failed_generator": generator + 1,
                }),
            }
        })
        .collect();
    let (pseudogroup, verdict) = match structural_pseudogroup(&atlas, o.wordlen) {
        Ok(gens) => (
            json!({
                "count": gens.len(),
                "generators": gens.iter().map(|g| json!({
                    "source": g.source + 1,
                    "target": g.target + 1,
                    "map": f.affine_string(&g.transition.map),
                    "domain": f.cell(&g.transition.domain),
                })).collect::<Vec<_>>(),
            }),
            "certified",
        ),
        Err(QuasifoldError::Uncertified(_)) => (Value::Null, "uncertified"),
        Err(e) => return Err(invalid("transition", e)),
    };
    let mut exit = EXIT_OK;
    let query = match &p.raw.query {
        Some(q) => {
            let x = p.vector("query.x", &q.x)?;
            let y = p.vector("query.y", &q.y)?;
            let v = quotient_point_equal(&atlas, (q.chart_x, &x), (q.chart_y, &y), o.wordlen, &order)
                .map_err(|e| invalid("query", e))?;
            let (detail, qv, code) = orbit_verdict(&v, &move_name);
            exit = code;
            json!({
                "x": { "chart": q.chart_x + 1, "point": f.vector(&x) },
                "y": { "chart": q.chart_y + 1, "point": f.vector(&y) },
                "verdict": qv,
                "witness": detail,
            })
        }
        None => Value::Null,
    };
    let results = json!({
        "charts": atlas.charts.len(),
        "radius": o.wordlen,
        "transitions": transitions,
        "structural_pseudogroup": pseudogroup,
        "moves": move_names,
        "query": query,
    });
    Ok(Outcome { results, verdict: verdict.into(), numeric: None, exit })
}
