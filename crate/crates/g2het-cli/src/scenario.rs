//! Scenario files: JSON documents describing a coframe, structures and gauge
//! blocks, with every form written in the expression language of [`crate::expr`].

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use g2het::circlefam::{CircleScenario, COS, SIN};
use g2het::exterior::{Coframe, DiffTable, Form};
use g2het::gauge::{GaugeAlgebra, GaugeField, MatrixConnection};
use g2het::liecat::{sasakian_coframe, sasakian_local, sigma_minus, sigma_plus};
use g2het::nilansatz::{build_phi, CharacteristicCase, NilScenario};
use g2het::ring::{ParamSet, Scalar};
use g2het::sasakian::{phi_of, SasKind};
use g2het::su3core::{su3_validate, SUThreeStructure};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use thiserror::Error;

use crate::checks::CheckId;
use crate::expr::{self, Context, ExprError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{field}: line {line}, column {column}: {message}")]
    Expr { field: String, line: usize, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::Invalid(msg.into()))
}

/// An expression given either as a string or as a bare JSON integer.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprSrc(pub String);

impl<'de> Deserialize<'de> for ExprSrc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        Ok(match Raw::deserialize(d).map_err(|_| de::Error::custom("expected an expression string or an integer"))? {
            Raw::Text(s) => ExprSrc(s),
            Raw::Int(n) => ExprSrc(n.to_string()),
        })
    }
}

/// A JSON object of expressions that keeps its key order and rejects duplicate keys.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OrderedExprs(pub Vec<(String, ExprSrc)>);

impl<'de> Deserialize<'de> for OrderedExprs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedExprs;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping names to expressions")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> Result<OrderedExprs, A::Error> {
                let mut out: Vec<(String, ExprSrc)> = Vec::new();
                while let Some((k, v)) = m.next_entry::<String, ExprSrc>()? {
                    if out.iter().any(|(x, _)| *x == k) {
                        return Err(de::Error::custom(format!("duplicate key `{k}`")));
                    }
                    out.push((k, v));
                }
                Ok(OrderedExprs(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Coframe,
    Sasakian,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub model: Model,
    pub dimension: Option<usize>,
    #[serde(default)]
    pub parameters: Vec<String>,
    #[serde(default)]
    pub sign_parameters: Vec<String>,
    #[serde(default)]
    pub circle_pairs: Vec<[String; 2]>,
    pub generators: Option<Vec<String>>,
    #[serde(default)]
    pub differentials: OrderedExprs,
    #[serde(default)]
    pub forms: OrderedExprs,
    pub g2: Option<G2Spec>,
    pub su3: Option<Su3Spec>,
    pub circle: Option<CircleSpec>,
    #[serde(default)]
    pub gauge: GaugeList,
    pub matrix_connection: Option<MatrixSpec>,
    #[serde(default)]
    pub checks: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2Spec {
    pub phi: Option<ExprSrc>,
    pub ansatz: Option<AnsatzSpec>,
}

/// The nilpotent ansatz: `d e^{4+i} = delta sigma_i^+ + eps_i sigma_i^-` with vertical rotation `b`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub delta: ExprSrc,
    pub eps: [ExprSrc; 3],
    pub b: Option<[[ExprSrc; 3]; 3]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Su3Spec {
    pub omega: ExprSrc,
    pub upsilon_plus: ExprSrc,
    pub upsilon_minus: ExprSrc,
}

/// Circle bundle over the SU(3) base. The angle uses the circle pair `cos_t`, `sin_t`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSpec {
    pub deta: ExprSrc,
    /// 1-based slot of `eta` in the 7-dimensional coframe (default 7).
    pub eta_position: Option<usize>,
    /// Also lift the base gauge blocks and require a solution on the total space.
    #[serde(default)]
    pub lift: bool,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(untagged)]
pub enum GaugeList {
    #[default]
    None,
    One(Box<GaugeSpec>),
    Many(Vec<GaugeSpec>),
}

impl GaugeList {
    fn specs(&self) -> Vec<&GaugeSpec> {
        match self {
            GaugeList::None => vec![],
            GaugeList::One(g) => vec![g],
            GaugeList::Many(v) => v.iter().collect(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    pub label: Option<String>,
    pub generators: Option<Vec<String>>,
    pub brackets: Option<BracketSpec>,
    pub connection: Option<OrderedExprs>,
    pub curvature: Option<OrderedExprs>,
    /// A block given only through its 4-form `<F ^ F>`.
    pub declared: Option<ExprSrc>,
    pub pairing: Option<PairingSpec>,
    pub scale: Option<ExprSrc>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum BracketSpec {
    /// Milnor basis `[Y2,Y3] = l1 Y1` and cyclic.
    Diagonal {
        #[serde(rename = "diagonalC")]
        diagonal_c: [ExprSrc; 3],
    },
    /// Keys `"Ya,Yb"`, values linear combinations of the generators.
    Table(OrderedExprs),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PairingSpec {
    Matrix(Vec<Vec<ExprSrc>>),
    Keyword(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    /// Built-in connection: `rn32` or `hh`.
    pub case: Option<String>,
    /// Entries `"i,j"` (1-based) of the matrix of 1-forms.
    pub gamma: Option<OrderedExprs>,
}

/// One gauge block, with its pairing still open when the file asked for `"solve"`.
#[derive(Clone, Debug)]
pub struct GaugeBlock {
    pub field: GaugeField,
    pub solve_pairing: bool,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub source: String,
    pub coframe: Arc<Coframe>,
    pub params: Arc<ParamSet>,
    pub table: DiffTable,
    pub forms: HashMap<String, Form>,
    pub phi: Option<Form>,
    pub su3: Option<SUThreeStructure>,
    pub circle: Option<CircleScenario>,
    pub lift: bool,
    pub gauge: Vec<GaugeBlock>,
    pub matrix: Option<MatrixConnection>,
    pub checks: Vec<CheckId>,
}

/// Maps an expression error back to a line and column of the JSON source.
struct Locator<'a> {
    src: &'a str,
}

impl Locator<'_> {
    fn expr_error(&self, field: &str, text: &str, e: ExprError) -> ScenarioError {
        let quoted = serde_json::to_string(text).unwrap_or_default();
        let (line, column) = match self.src.find(&quoted) {
            Some(off) => {
                let before = &self.src[..off];
                let line = before.matches('\n').count() + 1;
                let col = before.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
                (line, col + e.column)
            }
            None => (0, e.column),
        };
        ScenarioError::Expr { field: field.into(), line, column, message: e.message }
    }
}

struct Builder<'a> {
    loc: Locator<'a>,
    coframe: Arc<Coframe>,
    params: Arc<ParamSet>,
    forms: HashMap<String, Form>,
}

impl Builder<'_> {
    fn ctx(&self) -> Context<'_> {
        Context { coframe: &self.coframe, params: &self.params, forms: &self.forms }
    }

    fn form(&self, field: &str, e: &ExprSrc, degree: Option<usize>) -> Result<Form, ScenarioError> {
        expr::parse_form(&e.0, &self.ctx(), degree).map_err(|x| self.loc.expr_error(field, &e.0, x))
    }

    fn scalar(&self, field: &str, e: &ExprSrc) -> Result<Scalar, ScenarioError> {
        expr::parse_scalar(&e.0, &self.ctx()).map_err(|x| self.loc.expr_error(field, &e.0, x))
    }

    fn matrix(&self, field: &str, rows: &[Vec<ExprSrc>], n: usize) -> Result<Vec<Vec<Scalar>>, ScenarioError> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return invalid(format!("{field}: expected a {n}x{n} matrix"));
        }
        rows.iter()
            .enumerate()
            .map(|(i, r)| r.iter().enumerate().map(|(j, x)| self.scalar(&format!("{field}[{i}][{j}]"), x)).collect())
            .collect()
    }

    fn gauge_block(&self, k: usize, g: &GaugeSpec, table: &DiffTable) -> Result<GaugeBlock, ScenarioError> {
        let label = g.label.clone().unwrap_or_else(|| format!("A{}", k + 1));
        let field = format!("gauge[{label}]");
        let given = [g.connection.is_some(), g.curvature.is_some(), g.declared.is_some()];
        if given.iter().filter(|x| **x).count() != 1 {
            return invalid(format!("{field}: give exactly one of connection, curvature, declared"));
        }
        let scale = g.scale.as_ref().map(|s| self.scalar(&format!("{field}.scale"), s)).transpose()?;
        if let Some(ff) = &g.declared {
            if g.generators.is_some() || g.brackets.is_some() || g.pairing.is_some() {
                return invalid(format!("{field}: a declared block takes only label, declared and scale"));
            }
            let f = GaugeField::declared(&label, self.form(&format!("{field}.declared"), ff, Some(4))?);
            let f = scale.map(|s| f.scaled(&s)).unwrap_or(f);
            return Ok(GaugeBlock { field: f, solve_pairing: false });
        }
        let names: Vec<String> = match (&g.generators, &g.brackets) {
            (Some(n), _) => n.clone(),
            (None, Some(BracketSpec::Diagonal { .. })) => (1..=3).map(|i| format!("Y{i}")).collect(),
            (None, _) => {
                let m = g.connection.as_ref().or(g.curvature.as_ref()).expect("one is given");
                m.0.iter().map(|(k, _)| k.clone()).collect()
            }
        };
        let n = names.len();
        if n == 0 {
            return invalid(format!("{field}: empty gauge algebra"));
        }
        let idx = |name: &str| names.iter().position(|x| x == name);
        let (solve_pairing, pairing) = match &g.pairing {
            None => (false, unit(n)),
            Some(PairingSpec::Keyword(w)) if w == "solve" => (true, unit(n)),
            Some(PairingSpec::Keyword(w)) => return invalid(format!("{field}.pairing: unknown keyword `{w}`")),
            Some(PairingSpec::Matrix(rows)) => (false, self.matrix(&format!("{field}.pairing"), rows, n)?),
        };
        let mut c = vec![vec![vec![Scalar::zero(); n]; n]; n];
        match &g.brackets {
            None => {}
            Some(BracketSpec::Diagonal { diagonal_c }) => {
                if n != 3 {
                    return invalid(format!("{field}: diagonalC needs three generators"));
                }
                for k in 0..3 {
                    let l = self.scalar(&format!("{field}.brackets.diagonalC[{k}]"), &diagonal_c[k])?;
                    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                    c[j][i][k] = -&l;
                    c[i][j][k] = l;
                }
            }
            Some(BracketSpec::Table(entries)) => {
                let alg_cf = Coframe::new(&names);
                let empty = HashMap::new();
                let ctx = Context { coframe: &alg_cf, params: &self.params, forms: &empty };
                for (key, val) in &entries.0 {
                    let f = format!("{field}.brackets[{key}]");
                    let parts: Vec<&str> =
                        key.trim_matches(|ch| ch == '[' || ch == ']').split(',').map(str::trim).collect();
                    let (Some(a), Some(b)) = (parts.first().and_then(|p| idx(p)), parts.get(1).and_then(|p| idx(p)))
                    else {
                        return invalid(format!("{f}: key must name two generators as \"Ya,Yb\""));
                    };
                    if parts.len() != 2 {
                        return invalid(format!("{f}: key must name two generators as \"Ya,Yb\""));
                    }
                    let rhs =
                        expr::parse_form(&val.0, &ctx, Some(1)).map_err(|e| self.loc.expr_error(&f, &val.0, e))?;
                    for k in 0..n {
                        let x = rhs.coeff(1 << k);
                        if !c[a][b][k].is_zero() && c[a][b][k] != x {
                            return invalid(format!("{f}: conflicts with an earlier entry"));
                        }
                        c[b][a][k] = -&x;
                        c[a][b][k] = x;
                    }
                }
            }
        }
        let alg = GaugeAlgebra::new(names.clone(), c, pairing)
            .map_err(|e| ScenarioError::Invalid(format!("{field}: {e}")))?;
        let comps = g.connection.as_ref().or(g.curvature.as_ref()).expect("one is given");
        let degree = if g.connection.is_some() { 1 } else { 2 };
        let mut forms = vec![Form::zero(self.coframe.dim()); n];
        for (key, val) in &comps.0 {
            let Some(i) = idx(key) else {
                return invalid(format!("{field}: `{key}` is not a generator of the algebra"));
            };
            forms[i] = self.form(&format!("{field}.{key}"), val, Some(degree))?;
        }
        let gf = if g.connection.is_some() {
            GaugeField::from_connection(&label, alg, forms, table)
        } else {
            GaugeField::from_curvature(&label, alg, forms)
        }
        .map_err(|e| ScenarioError::Invalid(format!("{field}: {e}")))?;
        let gf = scale.map(|s| gf.scaled(&s)).unwrap_or(gf);
        Ok(GaugeBlock { field: gf, solve_pairing })
    }
}

fn unit(n: usize) -> Vec<Vec<Scalar>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect()
}

fn check_name(name: &str, what: &str) -> Result<(), ScenarioError> {
    let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        invalid(format!("{what} `{name}` is not an identifier"))
    }
}

pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
    let src = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    parse_scenario(&src, &path.display().to_string())
}

/// Parses and validates a scenario document.
pub fn parse_scenario(src: &str, source: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(src).map_err(|e| ScenarioError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build(&file, src, source)
}

fn build(file: &ScenarioFile, src: &str, source: &str) -> Result<Scenario, ScenarioError> {
    let mut pb = ParamSet::builder();
    for p in &file.parameters {
        check_name(p, "parameter")?;
        pb = pb.free(p);
    }
    for p in &file.sign_parameters {
        check_name(p, "sign parameter")?;
        pb = pb.sign(p);
    }
    for [c, s] in &file.circle_pairs {
        check_name(c, "parameter")?;
        check_name(s, "parameter")?;
        pb = pb.circle(c, s);
    }
    let params = pb.build().map_err(|e| ScenarioError::Invalid(format!("parameters: {e}")))?;

    let ansatz = file.g2.as_ref().and_then(|g| g.ansatz.as_ref());
    let coframe = match file.model {
        Model::Sasakian => {
            if file.dimension.is_some_and(|d| d != 7) || file.generators.is_some() || !file.differentials.0.is_empty() {
                return invalid("the sasakian model fixes dimension 7, its generators and its differentials");
            }
            if ansatz.is_some() {
                return invalid("g2.ansatz needs the coframe model");
            }
            sasakian_coframe()
        }
        Model::Coframe => {
            let cf = match (&file.generators, file.dimension) {
                (Some(g), d) => {
                    if d.is_some_and(|d| d != g.len()) {
                        return invalid("dimension disagrees with the number of generators");
                    }
                    for (i, n) in g.iter().enumerate() {
                        check_name(n, "generator")?;
                        if g[..i].contains(n) {
                            return invalid(format!("generator `{n}` is listed twice"));
                        }
                    }
                    Coframe::new(g)
                }
                (None, Some(d)) => Coframe::standard(d),
                (None, None) if ansatz.is_some() => Coframe::standard(7),
                (None, None) => return invalid("coframe model needs `dimension` or `generators`"),
            };
            if cf.dim() == 0 || cf.dim() > 16 {
                return invalid("dimension must be between 1 and 16");
            }
            cf
        }
    };
    for n in coframe.names() {
        if params.index(n).is_some() {
            return invalid(format!("`{n}` is both a generator and a parameter"));
        }
    }
    let mut b = Builder { loc: Locator { src }, coframe: Arc::new(coframe), params, forms: HashMap::new() };
    let dim = b.coframe.dim();

    // Built-in named forms.
    if file.model == Model::Sasakian {
        for kind in SasKind::all() {
            b.forms.insert(format!("phi_{kind}"), phi_of(kind));
        }
    } else if dim == 7 && b.coframe.names().iter().enumerate().all(|(i, n)| *n == format!("e{}", i + 1)) {
        for i in 1..=3 {
            b.forms.insert(format!("sp{i}"), sigma_plus(i));
            b.forms.insert(format!("sm{i}"), sigma_minus(i));
        }
    }

    let mut nil = None;
    let table = if let Some(a) = ansatz {
        if dim != 7 || !b.forms.contains_key("sp1") {
            return invalid("g2.ansatz needs the standard 7-dimensional coframe");
        }
        if !file.differentials.0.is_empty() {
            return invalid("g2.ansatz fixes the differentials; remove `differentials`");
        }
        let delta = b.scalar("g2.ansatz.delta", &a.delta)?;
        let eps: Vec<Scalar> = a
            .eps
            .iter()
            .enumerate()
            .map(|(i, e)| b.scalar(&format!("g2.ansatz.eps[{i}]"), e))
            .collect::<Result<_, _>>()?;
        let mut sc = NilScenario::new(delta, [eps[0].clone(), eps[1].clone(), eps[2].clone()]);
        if let Some(rows) = &a.b {
            let rows: Vec<Vec<ExprSrc>> = rows.iter().map(|r| r.to_vec()).collect();
            sc = sc.with_b(b.matrix("g2.ansatz.b", &rows, 3)?);
        }
        let t = sc.table();
        nil = Some(sc);
        t
    } else if file.model == Model::Sasakian {
        sasakian_local()
    } else {
        let mut entries = vec![Form::zero(dim); dim];
        for (g, e) in &file.differentials.0 {
            let Some(i) = b.coframe.index(g) else {
                return invalid(format!("differentials: `{g}` is not a generator"));
            };
            entries[i] = b.form(&format!("differentials.{g}"), e, Some(2))?;
        }
        let t = DiffTable::complete(b.coframe.clone(), entries)
            .map_err(|e| ScenarioError::Invalid(format!("differentials: {e}")))?;
        if let Err((g, r)) = t.d_squared_check() {
            return invalid(format!("differentials: d^2 {g} = {} is not zero", r.render(&b.coframe)));
        }
        t
    };

    for (name, e) in &file.forms.0 {
        check_name(name, "form name")?;
        if b.coframe.index(name).is_some() || b.coframe.alias(name).is_some() || b.params.index(name).is_some() {
            return invalid(format!("forms: `{name}` shadows a generator, alias or parameter"));
        }
        let f = b.form(&format!("forms.{name}"), e, None)?;
        b.forms.insert(name.clone(), f);
    }

    let phi = match (&file.g2, &nil) {
        (Some(_), Some(sc)) => {
            Some(build_phi(sc).map_err(|e| ScenarioError::Invalid(format!("g2.ansatz: {e}")))?.phi().clone())
        }
        (Some(G2Spec { phi: Some(p), ansatz: None }), None) => {
            if dim != 7 {
                return invalid("g2.phi needs a 7-dimensional coframe");
            }
            Some(b.form("g2.phi", p, Some(3))?)
        }
        (Some(_), None) => return invalid("g2: give exactly one of `phi` or `ansatz`"),
        (None, _) => None,
    };
    if file.g2.as_ref().is_some_and(|g| g.phi.is_some() && g.ansatz.is_some()) {
        return invalid("g2: give exactly one of `phi` or `ansatz`");
    }

    let su3 = match &file.su3 {
        None => None,
        Some(s) => {
            if dim != 6 {
                return invalid("su3 needs a 6-dimensional coframe");
            }
            let st = SUThreeStructure::orthonormal(
                b.form("su3.omega", &s.omega, Some(2))?,
                b.form("su3.upsilon_plus", &s.upsilon_plus, Some(3))?,
                b.form("su3.upsilon_minus", &s.upsilon_minus, Some(3))?,
            );
            su3_validate(&st).map_err(|e| ScenarioError::Invalid(format!("su3: {e}")))?;
            Some(st)
        }
    };

    let specs = file.gauge.specs();
    let gauge: Vec<GaugeBlock> =
        specs.iter().enumerate().map(|(k, g)| b.gauge_block(k, g, &table)).collect::<Result<_, _>>()?;
    let mut labels: Vec<&str> = gauge.iter().map(|g| g.field.label.as_str()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return invalid("gauge: block labels must be distinct");
    }

    let (circle, lift) = match &file.circle {
        None => (None, false),
        Some(c) => {
            let Some(base) = su3.clone() else {
                return invalid("circle needs an su3 base");
            };
            if !b.params.circle_pairs().iter().any(|(x, y)| x == COS && y == SIN) {
                return invalid(format!("circle needs the circle pair [\"{COS}\", \"{SIN}\"]"));
            }
            let pos = c.eta_position.unwrap_or(7);
            if !(1..=7).contains(&pos) {
                return invalid("circle.eta_position must be between 1 and 7");
            }
            let deta = b.form("circle.deta", &c.deta, Some(2))?;
            let cs = CircleScenario::new("scenario", base, table.clone(), pos - 1, deta, b.params.clone())
                .map_err(|e| ScenarioError::Invalid(format!("circle: {e}")))?;
            (Some(cs), c.lift)
        }
    };

    let matrix = match &file.matrix_connection {
        None => None,
        Some(m) => Some(match (&m.case, &m.gamma) {
            (Some(c), None) => match c.as_str() {
                "rn32" => CharacteristicCase::RN32.connection(),
                "hh" => CharacteristicCase::HH.connection(),
                other => return invalid(format!("matrix_connection.case: unknown case `{other}` (rn32|hh)")),
            },
            (None, Some(entries)) => {
                let mut g = MatrixConnection::zero(dim);
                for (key, val) in &entries.0 {
                    let ij: Vec<Option<usize>> = key.split(',').map(|x| x.trim().parse::<usize>().ok()).collect();
                    let [Some(i), Some(j)] = ij[..] else {
                        return invalid(format!("matrix_connection.gamma: key `{key}` must be \"i,j\""));
                    };
                    if !(1..=dim).contains(&i) || !(1..=dim).contains(&j) {
                        return invalid(format!("matrix_connection.gamma: index out of range in `{key}`"));
                    }
                    g.gamma[i - 1][j - 1] = b.form(&format!("matrix_connection.gamma[{key}]"), val, Some(1))?;
                }
                g
            }
            _ => return invalid("matrix_connection: give exactly one of `case` or `gamma`"),
        }),
    };

    let checks = if file.checks.is_empty() {
        CheckId::defaults(phi.is_some(), su3.is_some(), circle.is_some(), !gauge.is_empty(), matrix.is_some())
    } else {
        let mut v = Vec::new();
        for c in &file.checks {
            let id: CheckId = c.parse().map_err(ScenarioError::Invalid)?;
            if !v.contains(&id) {
                v.push(id);
            }
        }
        v
    };

    Ok(Scenario {
        source: source.to_string(),
        coframe: b.coframe.clone(),
        params: b.params.clone(),
        table,
        forms: b.forms,
        phi,
        su3,
        circle,
        lift,
        gauge,
        matrix,
        checks,
    })
}
