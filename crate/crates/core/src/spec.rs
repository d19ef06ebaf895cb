//! Example files: a TOML description of charts, algebroid, action,
//! cocycles, fixed points and connection, resolved into validated models.
//!
//! Expression strings are parsed against the coordinate names of the chart
//! they belong to; errors carry the line and column inside the file.

use std::ops::Range;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use toml::Spanned;

use crate::algebroid::{AlgebroidModel, LocalAlgebroid};
use crate::alt::{sort_sign, Alt};
use crate::connection::{dual_connection, levi_civita, AConnectionModel, MatForm};
use crate::equivariant::{p_mixed, xi_constants, EquivTwistedCochain, LieAlgebraAction};
use crate::expr::{parse_expr, Expr, SymbolTable};
use crate::geometry::{
    transition_check_form, transition_check_vector, Chart, DiffForm, ManifoldModel, Point,
    Quadrature, TransitionSample, VectorField,
};
use crate::localization::DeclaredFixedPoint;
use crate::sampling::FunctionPool;
use crate::twisted::TwistedCochain;
use crate::{Error, Result};

/// Names and sources of the examples shipped with the library.
pub const BUILTINS: &[(&str, &str)] = &[
    (
        "s2-tangent-rotation",
        include_str!("../data/s2-tangent-rotation.toml"),
    ),
    (
        "t2-tangent-translation",
        include_str!("../data/t2-tangent-translation.toml"),
    ),
    ("s2-poisson", include_str!("../data/s2-poisson.toml")),
    (
        "s2-atiyah-line",
        include_str!("../data/s2-atiyah-line.toml"),
    ),
    ("s2xs2-tangent", include_str!("../data/s2xs2-tangent.toml")),
    ("su2-point", include_str!("../data/su2-point.toml")),
];

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Residual bound for the consistency checks run while loading.
pub const LOAD_TOL: f64 = 1e-8;

type S = Spanned<String>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: String,
    #[serde(default)]
    summary: String,
    dim: usize,
    #[serde(default)]
    chart: Vec<RawChart>,
    #[serde(default)]
    transition: Vec<RawTransition>,
    algebroid: RawAlgebroid,
    action: Option<RawAction>,
    #[serde(default)]
    cocycle: Vec<RawCocycle>,
    #[serde(default)]
    fixed_point: Vec<DeclaredFixedPoint>,
    connection: Option<RawConnection>,
    #[serde(default)]
    pool: Vec<RawPool>,
    #[serde(default)]
    defaults: RawDefaults,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    F(f64),
    S(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    id: String,
    coords: Vec<String>,
    #[serde(default = "one")]
    orientation: f64,
    #[serde(default)]
    evaluation: bool,
    sample_box: Vec<[Num; 2]>,
    quadrature: Option<RawQuadrature>,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    domain: Vec<[Num; 2]>,
    order: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    from: String,
    to: String,
    map: Vec<S>,
    points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebroid {
    kind: String,
    fibre: Option<usize>,
    rank: Option<usize>,
    #[serde(default)]
    pi: Vec<RawPi>,
    #[serde(default)]
    structure: Vec<RawStructure>,
    #[serde(default)]
    anchor: Vec<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPi {
    chart: String,
    i: usize,
    j: usize,
    f: S,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    chart: Option<String>,
    g: usize,
    a: usize,
    b: usize,
    f: S,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    chart: String,
    #[serde(default)]
    generator: usize,
    rows: Vec<Vec<S>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    dim: usize,
    #[serde(default)]
    structure: Vec<RawConst>,
    b: Vec<RawGenerators>,
    #[serde(default)]
    fundamental: Vec<RawGenerators>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConst {
    c: usize,
    a: usize,
    b: usize,
    f: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerators {
    chart: String,
    generators: Vec<Vec<S>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCocycle {
    name: String,
    term: Vec<RawTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    #[serde(default)]
    exponents: Vec<u32>,
    degree: usize,
    coeffs: Vec<RawCoeffs>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoeffs {
    chart: String,
    entries: Vec<RawEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    idx: Vec<usize>,
    f: S,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnection {
    kind: String,
    #[serde(default)]
    metric: Vec<RawMatrix>,
    #[serde(default)]
    omega: Vec<RawMatrix>,
    #[serde(default)]
    lift: Option<String>,
    #[serde(default)]
    lift_matrix: Vec<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPool {
    chart: String,
    basis: Vec<S>,
    envelope: S,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDefaults {
    #[serde(default)]
    xi: Vec<f64>,
    phi: Option<String>,
    cocycle: Option<String>,
    bott_cocycle: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Defaults {
    pub xi: Vec<f64>,
    pub phi: Option<String>,
    /// Cocycle used by `localize` when none is named.
    pub cocycle: Option<String>,
    /// Cocycle used as `Ξ^g` by `bott` when none is named.
    pub bott_cocycle: Option<String>,
}

#[derive(Clone, Debug)]
pub struct NamedCocycle {
    pub name: String,
    pub cochain: EquivTwistedCochain,
}

/// A fully resolved and validated example.
#[derive(Clone, Debug)]
pub struct Example {
    pub name: String,
    pub summary: String,
    pub algebroid: AlgebroidModel,
    pub action: Option<LieAlgebraAction>,
    pub cocycles: Vec<NamedCocycle>,
    pub fixed_points: Vec<DeclaredFixedPoint>,
    pub connection: Option<AConnectionModel>,
    pub metric: Option<Vec<Vec<Vec<Expr>>>>,
    /// Globally smooth test functions per chart.
    pub pool: FunctionPool,
    pub defaults: Defaults,
    pub source: String,
}

impl Example {
    pub fn cocycle(&self, name: &str) -> Option<&EquivTwistedCochain> {
        self.cocycles
            .iter()
            .find(|c| c.name == name)
            .map(|c| &c.cochain)
    }

    pub fn require_action(&self) -> Result<&LieAlgebraAction> {
        self.action
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("example `{}` declares no action", self.name)))
    }

    pub fn require_connection(&self) -> Result<&AConnectionModel> {
        self.connection.as_ref().ok_or_else(|| {
            Error::Invalid(format!("example `{}` declares no connection", self.name))
        })
    }
}

/// Loads a built-in by name, or else a file by path.
pub fn load_example(name_or_path: &str) -> Result<Example> {
    if let Some(src) = builtin_source(name_or_path) {
        return load_str(src);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Error::Invalid(format!(
            "`{name_or_path}` is neither a built-in example nor an existing file"
        )));
    }
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("reading {}: {e}", path.display())))?;
    load_str(&src)
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before
        .rfind('\n')
        .map_or(before.chars().count(), |p| before[p + 1..].chars().count())
        + 1;
    (line, col)
}

fn spec_error(src: &str, span: Option<Range<usize>>, msg: impl std::fmt::Display) -> Error {
    match span {
        Some(r) => {
            let (l, c) = line_col(src, r.start);
            Error::Spec(format!("line {l}, column {c}: {msg}"))
        }
        None => Error::Spec(msg.to_string()),
    }
}

struct Ctx<'a> {
    src: &'a str,
    symbols: Vec<SymbolTable>,
    chart_ids: Vec<String>,
    g_dim: usize,
}

impl Ctx<'_> {
    fn chart(&self, id: &str) -> Result<usize> {
        self.chart_ids
            .iter()
            .position(|c| c == id)
            .ok_or_else(|| Error::Spec(format!("unknown chart `{id}`")))
    }

    fn expr(&self, chart: usize, s: &S) -> Result<Expr> {
        self.expr_with(&self.symbols[chart], s)
    }

    fn expr_with(&self, symbols: &SymbolTable, s: &S) -> Result<Expr> {
        parse_expr(s.get_ref(), symbols).map_err(|e| {
            // the span includes the opening quote
            let start = s.span().start + 1 + e.column().saturating_sub(1);
            spec_error(self.src, Some(start..start), e)
        })
    }

    fn matrix(&self, chart: usize, rows: &[Vec<S>]) -> Result<Vec<Vec<Expr>>> {
        rows.iter()
            .map(|r| r.iter().map(|s| self.expr(chart, s)).collect())
            .collect()
    }

    /// Per-chart blocks, each chart exactly once.
    fn per_chart<'b, T>(
        &self,
        items: &'b [T],
        chart_of: impl Fn(&T) -> &str,
        what: &str,
    ) -> Result<Vec<&'b T>> {
        let mut out: Vec<Option<&T>> = vec![None; self.chart_ids.len()];
        for it in items {
            let ch = self.chart(chart_of(it))?;
            if out[ch].replace(it).is_some() {
                return Err(Error::Spec(format!(
                    "{what}: chart `{}` given twice",
                    self.chart_ids[ch]
                )));
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(i, o)| {
                o.ok_or_else(|| {
                    Error::Spec(format!("{what}: missing chart `{}`", self.chart_ids[i]))
                })
            })
            .collect()
    }
}

fn num(v: &Num, what: &str) -> Result<f64> {
    match v {
        Num::F(x) => Ok(*x),
        Num::S(s) => {
            let e = parse_expr(s, &SymbolTable::new(&[] as &[String], &[] as &[String]))
                .map_err(|e| Error::Spec(format!("{what}: {e}")))?;
            Ok(e.eval(&[], &[])?)
        }
    }
}

fn boxes(v: &[[Num; 2]], what: &str) -> Result<Vec<(f64, f64)>> {
    v.iter()
        .map(|[a, b]| Ok((num(a, what)?, num(b, what)?)))
        .collect()
}

/// Parses and validates an example from its TOML source.
pub fn load_str(src: &str) -> Result<Example> {
    let raw: RawSpec = toml::from_str(src).map_err(|e| spec_error(src, e.span(), e.message()))?;
    let m = raw.dim;

    // algebroids over a point bring their own chart
    let point_algebra = raw.algebroid.kind == "lie_algebra";
    let (manifold, symbols, chart_ids) = if point_algebra {
        (
            None,
            vec![SymbolTable::new(&[] as &[String], &[] as &[String])],
            vec!["pt".to_string()],
        )
    } else {
        let mut charts = Vec::new();
        for c in &raw.chart {
            let what = format!("chart `{}`", c.id);
            charts.push(Chart {
                id: c.id.clone(),
                coords: c.coords.clone(),
                quadrature: match &c.quadrature {
                    Some(q) => Some(Quadrature {
                        domain: boxes(&q.domain, &what)?,
                        order: q.order.clone(),
                    }),
                    None => None,
                },
                evaluation: c.evaluation,
                orientation: c.orientation,
                sample_box: boxes(&c.sample_box, &what)?,
            });
        }
        let manifold = ManifoldModel::new(m, charts)?;
        let symbols = manifold.charts.iter().map(Chart::symbols).collect();
        let ids = manifold.charts.iter().map(|c| c.id.clone()).collect();
        (Some(manifold), symbols, ids)
    };
    let ctx = Ctx {
        src,
        symbols,
        chart_ids,
        g_dim: raw.action.as_ref().map_or(0, |a| a.dim),
    };

    let algebroid = match manifold {
        None => build_point_algebra(&ctx, &raw.algebroid)?,
        Some(mut manifold) => {
            for t in &raw.transition {
                add_transitions(&ctx, &mut manifold, t)?;
            }
            build_algebroid(&ctx, manifold, &raw.algebroid)?
        }
    };
    let n_charts = algebroid.manifold.n_charts();
    let r = algebroid.rank;

    let action = match &raw.action {
        None => None,
        Some(ra) => Some(build_action(&ctx, &algebroid, ra)?),
    };
    let g_dim = ctx.g_dim;

    let mut cocycles = Vec::new();
    for c in &raw.cocycle {
        let mut eq = EquivTwistedCochain::zero(g_dim);
        for t in &c.term {
            if t.exponents.len() > g_dim {
                return Err(Error::Spec(format!(
                    "cocycle `{}`: exponent vector longer than the algebra dimension {g_dim}",
                    c.name
                )));
            }
            if t.degree > r {
                return Err(Error::Spec(format!(
                    "cocycle `{}`: degree {} exceeds rank {r}",
                    c.name, t.degree
                )));
            }
            let mut exps = t.exponents.clone();
            exps.resize(g_dim, 0);
            let blocks =
                ctx.per_chart(&t.coeffs, |b| &b.chart, &format!("cocycle `{}`", c.name))?;
            let mut charts = Vec::with_capacity(n_charts);
            for (ch, b) in blocks.iter().enumerate() {
                let mut alt = Alt::zero(r, t.degree);
                for e in &b.entries {
                    if e.idx.len() != t.degree
                        || e.idx.iter().any(|&i| i >= r)
                        || sort_sign(&e.idx).is_none()
                    {
                        return Err(spec_error(
                            src,
                            Some(e.f.span()),
                            format!(
                                "cocycle `{}`: bad index {:?} for degree {}",
                                c.name, e.idx, t.degree
                            ),
                        ));
                    }
                    let prev = alt.get(&e.idx);
                    alt.set(&e.idx, prev + ctx.expr(ch, &e.f)?);
                }
                charts.push(alt);
            }
            eq.push(exps, TwistedCochain::from_charts(charts)?);
        }
        cocycles.push(NamedCocycle {
            name: c.name.clone(),
            cochain: eq,
        });
    }

    for fp in &raw.fixed_point {
        let ch = ctx.chart(&fp.chart)?;
        if fp.coords.len() != m
            || fp.metric.len() != m
            || fp.metric.iter().any(|row| row.len() != m)
        {
            return Err(Error::Spec(format!(
                "fixed point in `{}` has the wrong dimensions",
                fp.chart
            )));
        }
        if !algebroid.manifold.charts[ch].evaluation {
            return Err(Error::Spec(format!(
                "fixed point declared in non-evaluation chart `{}`",
                fp.chart
            )));
        }
    }

    let (connection, metric) = match &raw.connection {
        None => (None, None),
        Some(rc) => {
            let (c, g) = build_connection(&ctx, &algebroid, action.as_ref(), rc)?;
            (Some(c), g)
        }
    };

    let mut pool = FunctionPool::polynomial(&algebroid.manifold);
    for p in &raw.pool {
        let ch = ctx.chart(&p.chart)?;
        pool.basis[ch] = p
            .basis
            .iter()
            .map(|s| ctx.expr(ch, s))
            .collect::<Result<_>>()?;
        pool.envelope[ch] = ctx.expr(ch, &p.envelope)?;
    }

    let defaults = Defaults {
        xi: if raw.defaults.xi.is_empty() {
            vec![1.0; g_dim]
        } else {
            raw.defaults.xi.clone()
        },
        phi: raw.defaults.phi.clone(),
        cocycle: raw.defaults.cocycle.clone(),
        bott_cocycle: raw.defaults.bott_cocycle.clone(),
    };
    if defaults.xi.len() != g_dim {
        return Err(Error::Spec(format!("default xi needs {g_dim} components")));
    }
    for name in [&defaults.cocycle, &defaults.bott_cocycle]
        .into_iter()
        .flatten()
    {
        if !cocycles.iter().any(|c| &c.name == name) {
            return Err(Error::Spec(format!(
                "default cocycle `{name}` is not declared"
            )));
        }
    }

    let ex = Example {
        name: raw.name,
        summary: raw.summary,
        algebroid,
        action,
        cocycles,
        fixed_points: raw.fixed_point,
        connection,
        metric,
        pool,
        defaults,
        source: src.to_string(),
    };
    check_transitions(&ex)?;
    Ok(ex)
}

fn add_transitions(ctx: &Ctx, manifold: &mut ManifoldModel, t: &RawTransition) -> Result<()> {
    let from = ctx.chart(&t.from)?;
    let to = ctx.chart(&t.to)?;
    let m = manifold.dim;
    if t.map.len() != m {
        return Err(Error::Spec(format!(
            "transition {} → {}: map needs {m} components",
            t.from, t.to
        )));
    }
    let map: Vec<Expr> = t
        .map
        .iter()
        .map(|s| ctx.expr(from, s))
        .collect::<Result<_>>()?;
    let jacobian: Vec<Vec<Expr>> = map
        .iter()
        .map(|f| (0..m).map(|j| f.partial(j)).collect())
        .collect();
    for p in &t.points {
        if p.len() != m {
            return Err(Error::Spec(format!(
                "transition {} → {}: sample point dimension",
                t.from, t.to
            )));
        }
        let image = map
            .iter()
            .map(|f| f.eval(p, &[]))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        manifold.transitions.push(TransitionSample {
            from: Point {
                chart: from,
                coords: p.clone(),
            },
            to: Point {
                chart: to,
                coords: image,
            },
            jacobian: jacobian.clone(),
        });
    }
    Ok(())
}

fn constant_structure(
    ctx: &Ctx,
    r: usize,
    entries: &[RawStructure],
    chart: Option<usize>,
) -> Result<Vec<Alt>> {
    let mut s = vec![Alt::zero(r, 2); r];
    for e in entries {
        let here = match (&e.chart, chart) {
            (None, _) => true,
            (Some(c), Some(ch)) => ctx.chart(c)? == ch,
            (Some(_), None) => false,
        };
        if !here {
            continue;
        }
        if e.g >= r || e.a >= r || e.b >= r || e.a == e.b {
            return Err(spec_error(
                ctx.src,
                Some(e.f.span()),
                "structure index out of range",
            ));
        }
        let f = ctx.expr(chart.unwrap_or(0), &e.f)?;
        let prev = s[e.g].get(&[e.a, e.b]);
        s[e.g].set(&[e.a, e.b], prev + f);
    }
    Ok(s)
}

fn build_point_algebra(ctx: &Ctx, ra: &RawAlgebroid) -> Result<AlgebroidModel> {
    let r = ra
        .rank
        .ok_or_else(|| Error::Spec("a Lie algebra needs `rank`".into()))?;
    AlgebroidModel::lie_algebra_point(constant_structure(ctx, r, &ra.structure, None)?)
}

fn build_algebroid(
    ctx: &Ctx,
    manifold: ManifoldModel,
    ra: &RawAlgebroid,
) -> Result<AlgebroidModel> {
    let m = manifold.dim;
    match ra.kind.as_str() {
        "tangent" => AlgebroidModel::tangent(manifold),
        "atiyah" => AlgebroidModel::atiyah_trivial_bundle(manifold, ra.fibre.unwrap_or(1)),
        "poisson" => {
            let mut pi = vec![Alt::zero(m, 2); manifold.n_charts()];
            for e in &ra.pi {
                let ch = ctx.chart(&e.chart)?;
                if e.i >= m || e.j >= m || e.i == e.j {
                    return Err(spec_error(ctx.src, Some(e.f.span()), "bivector index out of range"));
                }
                let prev = pi[ch].get(&[e.i, e.j]);
                pi[ch].set(&[e.i, e.j], prev + ctx.expr(ch, &e.f)?);
            }
            AlgebroidModel::poisson_cotangent(manifold, pi)
        }
        "custom" => {
            let r = ra
                .rank
                .ok_or_else(|| Error::Spec("a custom algebroid needs `rank`".into()))?;
            let anchors = ctx.per_chart(&ra.anchor, |a| &a.chart, "anchor")?;
            let mut local = Vec::new();
            for (ch, a) in anchors.iter().enumerate() {
                let anchor = ctx.matrix(ch, &a.rows)?;
                if anchor.len() != m || anchor.iter().any(|row| row.len() != r) {
                    return Err(Error::Spec(format!("anchor on `{}` must be {m}×{r}", ctx.chart_ids[ch])));
                }
                local.push(LocalAlgebroid::new(anchor, constant_structure(ctx, r, &ra.structure, Some(ch))?)?);
            }
            AlgebroidModel::custom(manifold, local)
        }
        other => Err(Error::Spec(format!(
            "unknown algebroid kind `{other}` (expected tangent, poisson, atiyah, lie_algebra or custom)"
        ))),
    }
}

fn build_action(ctx: &Ctx, a: &AlgebroidModel, ra: &RawAction) -> Result<LieAlgebraAction> {
    let d = ra.dim;
    let mut structure = vec![Alt::zero(d, 2); d];
    for c in &ra.structure {
        if c.c >= d || c.a >= d || c.b >= d || c.a == c.b {
            return Err(Error::Spec("action structure index out of range".into()));
        }
        let prev = structure[c.c].get(&[c.a, c.b]);
        structure[c.c].set(&[c.a, c.b], prev + Expr::constant(c.f));
    }
    let gens = |items: &[RawGenerators], len: usize, what: &str| -> Result<Vec<Vec<Vec<Expr>>>> {
        ctx.per_chart(items, |g| &g.chart, what)?
            .iter()
            .enumerate()
            .map(|(ch, g)| {
                let mat = ctx.matrix(ch, &g.generators)?;
                if mat.len() != d || mat.iter().any(|v| v.len() != len) {
                    return Err(Error::Spec(format!(
                        "{what} on `{}`: need {d} generators with {len} components",
                        ctx.chart_ids[ch]
                    )));
                }
                Ok(mat)
            })
            .collect()
    };
    let b = gens(&ra.b, a.rank, "action b")?;
    let fundamental = if ra.fundamental.is_empty() {
        None
    } else {
        Some(gens(&ra.fundamental, a.manifold.dim, "fundamental fields")?)
    };
    let action = LieAlgebraAction::new(a, structure, b, fundamental)?;
    let report = action.check(a, 32, &mut ChaCha8Rng::seed_from_u64(0))?;
    for e in &report.entries {
        if e.max > LOAD_TOL {
            return Err(Error::Axiom(format!(
                "action: {} residual {:.3e}",
                e.name, e.max
            )));
        }
    }
    Ok(action)
}

/// Jacobian `∂_j X^i` of each generator's fundamental field.
fn field_jacobians(
    a: &AlgebroidModel,
    action: &LieAlgebraAction,
    ch: usize,
) -> Vec<Vec<Vec<Expr>>> {
    let m = a.manifold.dim;
    (0..action.dim)
        .map(|g| {
            let mut unit = vec![Expr::zero(); action.dim];
            unit[g] = Expr::one();
            let x = action.fundamental_of(a, ch, &unit);
            (0..m)
                .map(|i| (0..m).map(|j| x[i].partial(j)).collect())
                .collect()
        })
        .collect()
}

type ConnectionParts = (AConnectionModel, Option<Vec<Vec<Vec<Expr>>>>);

fn build_connection(
    ctx: &Ctx,
    a: &AlgebroidModel,
    action: Option<&LieAlgebraAction>,
    rc: &RawConnection,
) -> Result<ConnectionParts> {
    let n_charts = a.manifold.n_charts();
    let r = a.rank;
    let metric = if rc.metric.is_empty() {
        None
    } else {
        let blocks = ctx.per_chart(&rc.metric, |b| &b.chart, "metric")?;
        Some(
            blocks
                .iter()
                .enumerate()
                .map(|(ch, b)| ctx.matrix(ch, &b.rows))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    let mut conn = match rc.kind.as_str() {
        "levi_civita" | "levi_civita_dual" => {
            let g = metric.as_ref().ok_or_else(|| {
                Error::Spec("a Levi-Civita connection needs `metric` blocks".into())
            })?;
            let zeta = levi_civita(&a.manifold, g);
            let zeta = if rc.kind == "levi_civita" {
                zeta
            } else {
                dual_connection(&zeta)
            };
            AConnectionModel::from_ordinary_connection(a, &zeta)?
        }
        "matrix" => {
            let mut per_chart: Vec<Vec<Option<Vec<Vec<Expr>>>>> = vec![vec![None; r]; n_charts];
            for b in &rc.omega {
                let ch = ctx.chart(&b.chart)?;
                if b.generator >= r {
                    return Err(Error::Spec(format!(
                        "omega: frame index {} ≥ rank {r}",
                        b.generator
                    )));
                }
                per_chart[ch][b.generator] = Some(ctx.matrix(ch, &b.rows)?);
            }
            let n =
                rc.omega.first().map(|b| b.rows.len()).ok_or_else(|| {
                    Error::Spec("a matrix connection needs `omega` blocks".into())
                })?;
            let zero = vec![vec![Expr::zero(); n]; n];
            let omega = per_chart
                .into_iter()
                .map(|mats| {
                    let mats: Vec<Vec<Vec<Expr>>> = mats
                        .into_iter()
                        .map(|x| x.unwrap_or_else(|| zero.clone()))
                        .collect();
                    if mats
                        .iter()
                        .any(|x| x.len() != n || x.iter().any(|row| row.len() != n))
                    {
                        return Err(Error::Spec(format!("omega blocks must all be {n}×{n}")));
                    }
                    Ok(MatForm::one_form(r, &mats))
                })
                .collect::<Result<Vec<_>>>()?;
            AConnectionModel::new(a, omega)?
        }
        other => {
            return Err(Error::Spec(format!(
            "unknown connection kind `{other}` (expected levi_civita, levi_civita_dual or matrix)"
        )))
        }
    };
    if let Some(action) = action {
        let n = conn.n;
        let lift = match rc.lift.as_deref().unwrap_or("zero") {
            "zero" => vec![vec![MatForm::zero(n, r); action.dim]; n_charts],
            kind @ ("tangent" | "cotangent") => {
                if n != a.manifold.dim {
                    return Err(Error::Spec(format!(
                        "lift `{kind}` needs a bundle of rank {}",
                        a.manifold.dim
                    )));
                }
                (0..n_charts)
                    .map(|ch| {
                        field_jacobians(a, action, ch)
                            .into_iter()
                            .map(|j| {
                                let m = j.len();
                                let mat: Vec<Vec<Expr>> = (0..m)
                                    .map(|p| {
                                        (0..m)
                                            .map(|q| {
                                                if kind == "tangent" {
                                                    -&j[p][q]
                                                } else {
                                                    j[q][p].clone()
                                                }
                                            })
                                            .collect()
                                    })
                                    .collect();
                                MatForm::functions(r, &mat)
                            })
                            .collect()
                    })
                    .collect()
            }
            "explicit" => {
                let mut out = vec![vec![MatForm::zero(n, r); action.dim]; n_charts];
                for b in &rc.lift_matrix {
                    let ch = ctx.chart(&b.chart)?;
                    if b.generator >= action.dim {
                        return Err(Error::Spec("lift_matrix: generator out of range".into()));
                    }
                    let mat = ctx.matrix(ch, &b.rows)?;
                    if mat.len() != n || mat.iter().any(|row| row.len() != n) {
                        return Err(Error::Spec(format!("lift_matrix blocks must be {n}×{n}")));
                    }
                    out[ch][b.generator] = MatForm::functions(r, &mat);
                }
                out
            }
            other => {
                return Err(Error::Spec(format!(
                    "unknown lift `{other}` (expected zero, tangent, cotangent or explicit)"
                )))
            }
        };
        conn = conn.with_lift(lift);
    }
    Ok((conn, metric))
}

/// Transition consistency of the declared fundamental fields and of the
/// `p`-images of every cocycle at the default `ξ`.
fn check_transitions(ex: &Example) -> Result<()> {
    let a = &ex.algebroid;
    if a.manifold.transitions.is_empty() {
        return Ok(());
    }
    let n = a.manifold.n_charts();
    let bad = |what: String, res: Vec<f64>| -> Result<()> {
        let worst = res.into_iter().fold(0.0f64, f64::max);
        if worst > LOAD_TOL {
            return Err(Error::Spec(format!(
                "{what} disagrees across a chart transition (residual {worst:.3e})"
            )));
        }
        Ok(())
    };
    if let Some(action) = &ex.action {
        let xi = xi_constants(&ex.defaults.xi);
        let field = VectorField {
            charts: (0..n).map(|ch| action.fundamental_of(a, ch, &xi)).collect(),
        };
        bad(
            "the fundamental field".into(),
            transition_check_vector(&a.manifold, &field)?,
        )?;
        for c in &ex.cocycles {
            let vals = c.cochain.evaluate(a.rank, n, &xi);
            let forms = p_mixed(a, &vals);
            for k in 0..=a.manifold.dim {
                let w = DiffForm {
                    degree: k,
                    charts: forms.iter().map(|f| f.part(k).clone()).collect(),
                };
                if w.charts.iter().all(Alt::is_zero) {
                    continue;
                }
                bad(
                    format!("p of cocycle `{}` (degree {k})", c.name),
                    transition_check_form(&a.manifold, &w)?,
                )?;
            }
        }
    }
    Ok(())
}
