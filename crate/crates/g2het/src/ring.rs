//! Exact coefficient ring.
//!
//! A [`Scalar`] is a sparse polynomial with [`Rational`] coefficients in the
//! variables of a [`ParamSet`]. Two kinds of variables carry a relation that
//! is applied during normalization:
//!
//! * a circle pair `(c, s)` satisfies `c^2 + s^2 = 1`; every power `c^k` with
//!   `k >= 2` is rewritten through `c^2 = 1 - s^2`;
//! * a sign variable `x` satisfies `x^2 = 1`.
//!
//! With these rules the stored representation is unique, so equality of
//! scalars is equality of their term maps.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Builds the rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RingError {
    #[error("scalars built over incompatible parameter sets")]
    MismatchedParams,
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("duplicate parameter `{0}`")]
    DuplicateParam(String),
    #[error("circle constraint violated: {c}^2 + {s}^2 != 1")]
    CircleViolation { c: String, s: String },
    #[error("sign parameter `{0}` must be assigned +1 or -1")]
    SignViolation(String),
    #[error("parametric pivot {0} cannot be proven nonzero")]
    ParametricPivot(String),
    #[error("equation is not linear in the unknowns: {0}")]
    Nonlinear(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is singular")]
    Singular,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParamKind {
    Free,
    /// Cosine member of a circle pair; holds the index of its sine partner.
    Cos(usize),
    /// Sine member of a circle pair; holds the index of its cosine partner.
    Sin(usize),
    Sign,
}

/// Ordered, duplicate-free list of parameter names with their relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParamSet {
    names: Vec<String>,
    kinds: Vec<ParamKind>,
}

impl ParamSet {
    pub fn builder() -> ParamSetBuilder {
        ParamSetBuilder { set: ParamSet { names: Vec::new(), kinds: Vec::new() }, error: None }
    }

    pub fn empty() -> Arc<ParamSet> {
        Arc::new(ParamSet { names: Vec::new(), kinds: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kind(&self, i: usize) -> &ParamKind {
        &self.kinds[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn circle_pairs(&self) -> Vec<(String, String)> {
        self.kinds
            .iter()
            .enumerate()
            .filter_map(|(i, k)| match k {
                ParamKind::Cos(j) => Some((self.names[i].clone(), self.names[*j].clone())),
                _ => None,
            })
            .collect()
    }

    pub fn sign_params(&self) -> Vec<String> {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == ParamKind::Sign)
            .map(|(i, _)| self.names[i].clone())
            .collect()
    }

    /// `self` is a prefix of `other`: same leading names and relations.
    pub fn is_prefix_of(&self, other: &ParamSet) -> bool {
        self.names.len() <= other.names.len()
            && self.names.iter().zip(&other.names).all(|(a, b)| a == b)
            && self.kinds.iter().zip(&other.kinds).all(|(a, b)| a == b)
    }

    /// Appends free parameters, keeping every existing index stable.
    pub fn extend_free(self: &Arc<Self>, extra: &[String]) -> Result<Arc<ParamSet>, RingError> {
        let mut b = ParamSetBuilder { set: (**self).clone(), error: None };
        for n in extra {
            b = b.free(n);
        }
        b.build()
    }

    /// A scalar equal to the named parameter.
    pub fn var(self: &Arc<Self>, name: &str) -> Result<Scalar, RingError> {
        let i = self.index(name).ok_or_else(|| RingError::UnknownParam(name.to_string()))?;
        Ok(Scalar::var_index(self, i))
    }
}

pub struct ParamSetBuilder {
    set: ParamSet,
    error: Option<RingError>,
}

impl ParamSetBuilder {
    fn push(&mut self, name: &str, kind: ParamKind) {
        if self.set.names.iter().any(|n| n == name) {
            self.error.get_or_insert(RingError::DuplicateParam(name.to_string()));
            return;
        }
        self.set.names.push(name.to_string());
        self.set.kinds.push(kind);
    }

    pub fn free(mut self, name: &str) -> Self {
        self.push(name, ParamKind::Free);
        self
    }

    pub fn sign(mut self, name: &str) -> Self {
        self.push(name, ParamKind::Sign);
        self
    }

    pub fn circle(mut self, cos: &str, sin: &str) -> Self {
        let i = self.set.names.len();
        self.push(cos, ParamKind::Cos(i + 1));
        self.push(sin, ParamKind::Sin(i));
        self
    }

    pub fn build(self) -> Result<Arc<ParamSet>, RingError> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(Arc::new(self.set)),
        }
    }
}

/// Sparse exponent vector: `(variable index, exponent)` sorted by index, exponents positive.
pub type Mono = Vec<(u16, u32)>;

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// `a / b` when `b` divides `a`.
fn mono_div(a: &Mono, b: &Mono) -> Option<Mono> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &(v, e) in a {
        if j < b.len() && b[j].0 < v {
            return None;
        }
        if j < b.len() && b[j].0 == v {
            if b[j].1 > e {
                return None;
            }
            if e > b[j].1 {
                out.push((v, e - b[j].1));
            }
            j += 1;
        } else {
            out.push((v, e));
        }
    }
    if j < b.len() {
        return None;
    }
    Some(out)
}

fn mono_exp(m: &Mono, v: u16) -> u32 {
    m.iter().find(|(x, _)| *x == v).map(|(_, e)| *e).unwrap_or(0)
}

fn mono_set(m: &Mono, v: u16, e: u32) -> Mono {
    let mut out: Mono = m.iter().copied().filter(|(x, _)| *x != v).collect();
    if e > 0 {
        let pos = out.iter().position(|(x, _)| *x > v).unwrap_or(out.len());
        out.insert(pos, (v, e));
    }
    out
}

/// Dense lexicographic order (variable 0 most significant).
fn lex_cmp(a: &Mono, b: &Mono) -> Ordering {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match x.1.cmp(&y.1) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                    o => return o,
                },
            },
        }
    }
}

/// Canonical polynomial over a parameter set.
#[derive(Clone)]
pub struct Scalar {
    params: Option<Arc<ParamSet>>,
    terms: BTreeMap<Mono, Rational>,
}

fn join_params(a: &Option<Arc<ParamSet>>, b: &Option<Arc<ParamSet>>) -> Result<Option<Arc<ParamSet>>, RingError> {
    match (a, b) {
        (None, None) => Ok(None),
        (Some(p), None) | (None, Some(p)) => Ok(Some(p.clone())),
        (Some(p), Some(q)) => {
            if Arc::ptr_eq(p, q) || p.len() >= q.len() && q.is_prefix_of(p) {
                Ok(Some(p.clone()))
            } else if p.is_prefix_of(q) {
                Ok(Some(q.clone()))
            } else {
                Err(RingError::MismatchedParams)
            }
        }
    }
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar { params: None, terms: BTreeMap::new() }
    }

    pub fn one() -> Scalar {
        Scalar::from_rational(Rational::one())
    }

    pub fn from_int(n: i64) -> Scalar {
        Scalar::from_rational(rint(n))
    }

    pub fn from_frac(n: i64, d: i64) -> Scalar {
        Scalar::from_rational(rat(n, d))
    }

    pub fn from_rational(r: Rational) -> Scalar {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(Vec::new(), r);
        }
        Scalar { params: None, terms }
    }

    pub fn var_index(params: &Arc<ParamSet>, i: usize) -> Scalar {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(i as u16, 1)], Rational::one());
        Scalar { params: Some(params.clone()), terms }
    }

    pub fn params(&self) -> Option<&Arc<ParamSet>> {
        self.params.as_ref()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_empty())
    }

    /// The value when the scalar has no parameter dependence.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_empty().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map(|r| r.is_one()).unwrap_or(false)
    }

    fn from_terms(params: Option<Arc<ParamSet>>, raw: BTreeMap<Mono, Rational>) -> Scalar {
        let mut out = Scalar { params, terms: BTreeMap::new() };
        for (m, c) in raw {
            out.add_reduced(m, c);
        }
        out
    }

    /// Adds `c * m` applying the relations of the parameter set.
    fn add_reduced(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        if let Some(p) = &self.params {
            for &(v, e) in &m {
                match p.kinds[v as usize] {
                    ParamKind::Sign if e >= 2 => {
                        let m2 = mono_set(&m, v, e % 2);
                        self.add_reduced(m2, c);
                        return;
                    }
                    ParamKind::Cos(sv) if e >= 2 => {
                        let m1 = mono_set(&m, v, e - 2);
                        let s_e = mono_exp(&m1, sv as u16);
                        let m2 = mono_set(&m1, sv as u16, s_e + 2);
                        self.add_reduced(m1, c.clone());
                        self.add_reduced(m2, -c);
                        return;
                    }
                    _ => {}
                }
            }
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn try_add(&self, o: &Scalar) -> Result<Scalar, RingError> {
        let params = join_params(&self.params, &o.params)?;
        let mut out = Scalar { params, terms: self.terms.clone() };
        for (m, c) in &o.terms {
            out.add_reduced(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, o: &Scalar) -> Result<Scalar, RingError> {
        self.try_add(&o.neg_ref())
    }

    pub fn try_mul(&self, o: &Scalar) -> Result<Scalar, RingError> {
        let params = join_params(&self.params, &o.params)?;
        if self.is_zero() || o.is_zero() {
            return Ok(Scalar { params, terms: BTreeMap::new() });
        }
        let mut out = Scalar { params, terms: BTreeMap::new() };
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_reduced(mono_mul(m1, m2), c1 * c2);
            }
        }
        Ok(out)
    }

    fn mul_raw(&self, o: &Scalar) -> BTreeMap<Mono, Rational> {
        let mut out: BTreeMap<Mono, Rational> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m = mono_mul(m1, m2);
                let e = out.entry(m).or_insert_with(Rational::zero);
                *e += c1 * c2;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    fn neg_ref(&self) -> Scalar {
        Scalar { params: self.params.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, r: &Rational) -> Scalar {
        if r.is_zero() {
            return Scalar { params: self.params.clone(), terms: BTreeMap::new() };
        }
        Scalar { params: self.params.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect() }
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Rebinds the scalar to a parameter set extending its own.
    pub fn lift(&self, params: &Arc<ParamSet>) -> Result<Scalar, RingError> {
        let p = join_params(&self.params, &Some(params.clone()))?;
        Ok(Scalar { params: p, terms: self.terms.clone() })
    }

    /// Rebinds to a prefix of the current parameter set; fails if a dropped
    /// parameter still occurs.
    pub fn restrict(&self, params: &Option<Arc<ParamSet>>) -> Result<Scalar, RingError> {
        let Some(own) = &self.params else { return Ok(self.clone()) };
        let keep = params.as_ref().map(|p| p.len()).unwrap_or(0);
        if let Some(p) = params {
            if !p.is_prefix_of(own) {
                return Err(RingError::MismatchedParams);
            }
        }
        if self.terms.keys().any(|m| m.iter().any(|(v, _)| *v as usize >= keep)) {
            return Err(RingError::MismatchedParams);
        }
        Ok(Scalar { params: params.clone(), terms: self.terms.clone() })
    }

    /// Maximum exponent of variable `v` over all terms.
    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| mono_exp(m, v as u16)).max().unwrap_or(0)
    }

    pub fn depends_on(&self, v: usize) -> bool {
        self.degree_in(v) > 0
    }

    /// Substitutes rational values for named parameters.
    ///
    /// When both members of a circle pair are assigned, the values must lie
    /// on the unit circle; sign parameters accept only `+1` and `-1`.
    pub fn eval(&self, assignment: &HashMap<String, Rational>) -> Result<Scalar, RingError> {
        let Some(p) = &self.params else { return Ok(self.clone()) };
        for (name, val) in assignment {
            let i = p.index(name).ok_or_else(|| RingError::UnknownParam(name.clone()))?;
            match p.kinds[i] {
                ParamKind::Cos(j) => {
                    if let Some(sv) = assignment.get(&p.names[j]) {
                        if val * val + sv * sv != Rational::one() {
                            return Err(RingError::CircleViolation { c: name.clone(), s: p.names[j].clone() });
                        }
                    }
                }
                ParamKind::Sign if val.abs() != Rational::one() => {
                    return Err(RingError::SignViolation(name.clone()));
                }
                _ => {}
            }
        }
        let mut subs = HashMap::new();
        for (name, val) in assignment {
            subs.insert(p.index(name).unwrap(), Scalar::from_rational(val.clone()));
        }
        Ok(self.substitute_many(&subs))
    }

    /// Replaces variable `v` by the scalar `value`.
    pub fn substitute(&self, v: usize, value: &Scalar) -> Scalar {
        let mut subs = HashMap::new();
        subs.insert(v, value.clone());
        self.substitute_many(&subs)
    }

    pub fn substitute_many(&self, subs: &HashMap<usize, Scalar>) -> Scalar {
        if subs.is_empty() || self.is_constant() {
            return self.clone();
        }
        let mut acc = Scalar { params: self.params.clone(), terms: BTreeMap::new() };
        for (m, c) in &self.terms {
            let mut term = Scalar { params: self.params.clone(), terms: BTreeMap::new() };
            let mut kept: Mono = Vec::new();
            let mut factors: Vec<(usize, u32)> = Vec::new();
            for &(v, e) in m {
                if subs.contains_key(&(v as usize)) {
                    factors.push((v as usize, e));
                } else {
                    kept.push((v, e));
                }
            }
            term.terms.insert(kept, c.clone());
            for (v, e) in factors {
                term = &term * &subs[&v].pow(e);
            }
            acc = &acc + &term;
        }
        acc
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Scalar) -> Option<Scalar> {
        if d.is_zero() {
            return None;
        }
        if let Some(r) = d.as_rational() {
            return Some(self.scale(&r.recip()));
        }
        let params = join_params(&self.params, &d.params).ok()?;
        let lead = |t: &BTreeMap<Mono, Rational>| -> Option<(Mono, Rational)> {
            t.iter().max_by(|a, b| lex_cmp(a.0, b.0)).map(|(m, c)| (m.clone(), c.clone()))
        };
        let (dm, dc) = lead(&d.terms)?;
        let mut rem = self.terms.clone();
        let mut quot: BTreeMap<Mono, Rational> = BTreeMap::new();
        let mut guard = 0usize;
        while let Some((rm, rc)) = lead(&rem) {
            guard += 1;
            if guard > 10_000 {
                return None;
            }
            let qm = mono_div(&rm, &dm)?;
            let qc = &rc / &dc;
            let t = Scalar { params: None, terms: [(qm.clone(), qc.clone())].into_iter().collect() };
            for (m, c) in t.mul_raw(d) {
                let e = rem.entry(m.clone()).or_insert_with(Rational::zero);
                *e -= c;
                if e.is_zero() {
                    rem.remove(&m);
                }
            }
            *quot.entry(qm).or_insert_with(Rational::zero) += qc;
        }
        quot.retain(|_, c| !c.is_zero());
        let q = Scalar::from_terms(params, quot);
        let back = q.try_mul(d).ok()?;
        (back == *self).then_some(q)
    }

    /// Renders the scalar with its parameter names, e.g. `2*delta*delta - eps1`.
    pub fn render(&self) -> String {
        render_terms(self, None)
    }
}

fn render_monomial(params: Option<&Arc<ParamSet>>, m: &Mono) -> String {
    let mut parts = Vec::new();
    for &(v, e) in m {
        let name = params.and_then(|p| p.names.get(v as usize).cloned()).unwrap_or_else(|| format!("x{v}"));
        for _ in 0..e {
            parts.push(name.clone());
        }
    }
    parts.join("*")
}

/// Renders `scalar * suffix` as a signed sum of products, each product
/// starting with its rational factor when that factor is not 1.
pub(crate) fn render_terms(s: &Scalar, suffix: Option<&str>) -> String {
    if s.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    let mut ordered: Vec<(&Mono, &Rational)> = s.terms.iter().collect();
    ordered.sort_by(|a, b| {
        let da: u32 = a.0.iter().map(|x| x.1).sum();
        let db: u32 = b.0.iter().map(|x| x.1).sum();
        db.cmp(&da).then_with(|| lex_cmp(b.0, a.0))
    });
    for (i, (m, c)) in ordered.into_iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        let mono = render_monomial(s.params.as_ref(), m);
        if !a.is_one() || (mono.is_empty() && suffix.is_none()) {
            factors.push(render_rational(&a));
        }
        if !mono.is_empty() {
            factors.push(mono);
        }
        if let Some(sfx) = suffix {
            factors.push(sfx.to_string());
        }
        out.push_str(&factors.join("*"));
    }
    out
}

pub fn render_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact rational `n`-th root for odd `n`, when it exists.
pub fn rational_odd_root(x: &Rational, n: u32) -> Option<Rational> {
    assert!(n % 2 == 1, "only odd roots are unique over the rationals");
    let sign = if x.is_negative() { -1 } else { 1 };
    let num = x.numer().abs();
    let den = x.denom().clone();
    let rn = num.nth_root(n);
    let rd = den.nth_root(n);
    if rn.pow(n) == num && rd.pow(n) == den {
        Some(BigRational::new(rn * sign, rd))
    } else {
        None
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}
impl Eq for Scalar {}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::from_rational(r)
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $m:ident, $try:ident) => {
        impl std::ops::$tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                self.$try(o).expect("scalar operands over incompatible parameter sets")
            }
        }
        impl std::ops::$tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl std::ops::$tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
        impl std::ops::$tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                self.$m(&o)
            }
        }
    };
}
scalar_binop!(Add, add, try_add);
scalar_binop!(Sub, sub, try_sub);
scalar_binop!(Mul, mul, try_mul);

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}
impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

/// Determinant by expansion over column subsets (no division needed).
pub fn determinant(m: &[Vec<Scalar>]) -> Scalar {
    let n = m.len();
    if n == 0 {
        return Scalar::one();
    }
    // dets[S] = det of rows 0..|S| restricted to column set S.
    let mut dets: HashMap<u32, Scalar> = HashMap::new();
    dets.insert(0, Scalar::one());
    for row in 0..n {
        let mut next: HashMap<u32, Scalar> = HashMap::new();
        for (&set, d) in &dets {
            if d.is_zero() {
                continue;
            }
            for col in 0..n {
                if set & (1 << col) != 0 || m[row][col].is_zero() {
                    continue;
                }
                // sign = parity of columns in `set` greater than `col`
                let above = (set >> (col + 1)).count_ones();
                let term = &m[row][col] * d;
                let term = if above % 2 == 1 { -term } else { term };
                let e = next.entry(set | (1 << col)).or_insert_with(Scalar::zero);
                *e = &*e + &term;
            }
        }
        dets = next;
    }
    dets.remove(&((1u32 << n) - 1)).unwrap_or_else(Scalar::zero)
}

/// Inverse of a square matrix whose pivots can be chosen as nonzero
/// rationals or exact polynomial divisors.
pub fn invert_matrix(m: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>, RingError> {
    let n = m.len();
    let mut rows = Vec::new();
    let mut aug: Vec<Vec<Scalar>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            for j in 0..n {
                row.push(if i == j { Scalar::one() } else { Scalar::zero() });
            }
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| aug[r][col].as_rational().map(|x| !x.is_zero()).unwrap_or(false))
            .or_else(|| (col..n).find(|&r| !aug[r][col].is_zero()));
        let Some(p) = piv else { return Err(RingError::Singular) };
        aug.swap(col, p);
        let pv = aug[col][col].clone();
        let mut new_row = Vec::with_capacity(2 * n);
        for x in &aug[col] {
            new_row.push(x.div_exact(&pv).ok_or_else(|| RingError::ParametricPivot(pv.render()))?);
        }
        aug[col] = new_row;
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for k in 0..2 * n {
                    let v = &aug[r][k] - &(&f * &aug[col][k]);
                    aug[r][k] = v;
                }
            }
        }
    }
    for r in aug {
        rows.push(r[n..].to_vec());
    }
    Ok(rows)
}

/// One linear equation `sum_j coeffs[j] * x_j = rhs`.
#[derive(Clone, Debug)]
pub struct LinearEquation {
    pub coeffs: Vec<Scalar>,
    pub rhs: Scalar,
}

#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub unknowns: Vec<String>,
    pub rows: Vec<LinearEquation>,
}

#[derive(Clone, Debug)]
pub enum LinearSolution {
    Unique {
        values: Vec<Scalar>,
        /// Polynomials divided by during elimination; the solution is valid where they are nonzero.
        assumed_nonzero: Vec<Scalar>,
    },
    NoSolution {
        /// Nonzero right-hand side left over after elimination.
        residual: Scalar,
    },
    Underdetermined {
        particular: Vec<Scalar>,
        /// Null-space basis vectors, one per free unknown.
        basis: Vec<Vec<Scalar>>,
        free: Vec<usize>,
        assumed_nonzero: Vec<Scalar>,
    },
}

impl LinearSolution {
    pub fn unique(&self) -> Option<&[Scalar]> {
        match self {
            LinearSolution::Unique { values, .. } => Some(values),
            _ => None,
        }
    }
}

impl LinearSystem {
    pub fn new(unknowns: Vec<String>) -> Self {
        LinearSystem { unknowns, rows: Vec::new() }
    }

    /// Gauss-Jordan elimination over the polynomial ring.
    ///
    /// Constant pivots are preferred. A non-constant pivot is used only when
    /// it divides its whole row exactly; it is then recorded as an assumption.
    pub fn solve(&self) -> Result<LinearSolution, RingError> {
        let n = self.unknowns.len();
        let mut m: Vec<Vec<Scalar>> = self
            .rows
            .iter()
            .filter(|r| !(r.rhs.is_zero() && r.coeffs.iter().all(Scalar::is_zero)))
            .map(|r| {
                let mut row = r.coeffs.clone();
                row.resize(n, Scalar::zero());
                row.push(r.rhs.clone());
                row
            })
            .collect();
        let mut assumptions = Vec::new();
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            if rank == m.len() {
                break;
            }
            let mut constant =
                (rank..m.len()).find(|&r| m[r][col].as_rational().map(|x| !x.is_zero()).unwrap_or(false));
            if constant.is_none() {
                // sum_r p_r * row_r has pivot sum_r p_r^2, which is constant for
                // pivots such as (c, s) on a circle pair.
                let mut combo = vec![Scalar::zero(); n + 1];
                let mut q = Scalar::zero();
                for r in rank..m.len() {
                    let p = m[r][col].clone();
                    if p.is_zero() {
                        continue;
                    }
                    q = &q + &(&p * &p);
                    for (k, x) in m[r].iter().enumerate() {
                        combo[k] = &combo[k] + &(&p * x);
                    }
                }
                if q.as_rational().map(|x| !x.is_zero()).unwrap_or(false) {
                    m.push(combo);
                    constant = Some(m.len() - 1);
                }
            }
            let chosen = match constant {
                Some(r) => Some((r, None)),
                None => {
                    let mut found = None;
                    let mut offending = None;
                    for r in rank..m.len() {
                        let p = m[r][col].clone();
                        if p.is_zero() {
                            continue;
                        }
                        let divided: Option<Vec<Scalar>> = m[r].iter().map(|x| x.div_exact(&p)).collect();
                        match divided {
                            Some(row) => {
                                found = Some((r, Some((p, row))));
                                break;
                            }
                            None => offending = Some(p),
                        }
                    }
                    if found.is_none() {
                        if let Some(p) = offending {
                            return Err(RingError::ParametricPivot(p.render()));
                        }
                    }
                    found
                }
            };
            let Some((r, divided)) = chosen else { continue };
            m.swap(rank, r);
            match divided {
                Some((p, row)) => {
                    assumptions.push(p);
                    m[rank] = row;
                }
                None => {
                    let inv = m[rank][col].as_rational().unwrap().recip();
                    m[rank] = m[rank].iter().map(|x| x.scale(&inv)).collect();
                }
            }
            for i in 0..m.len() {
                if i != rank && !m[i][col].is_zero() {
                    let f = m[i][col].clone();
                    let pivot_row = m[rank].clone();
                    for (k, pv) in pivot_row.iter().enumerate().skip(col) {
                        if !pv.is_zero() {
                            m[i][k] = &m[i][k] - &(&f * pv);
                        }
                    }
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        for row in &m[rank..] {
            if !row[n].is_zero() {
                return Ok(LinearSolution::NoSolution { residual: row[n].clone() });
            }
        }
        let mut particular = vec![Scalar::zero(); n];
        for (i, &c) in pivot_cols.iter().enumerate() {
            particular[c] = m[i][n].clone();
        }
        let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
        if free.is_empty() {
            return Ok(LinearSolution::Unique { values: particular, assumed_nonzero: assumptions });
        }
        let basis = free
            .iter()
            .map(|&f| {
                let mut v = vec![Scalar::zero(); n];
                v[f] = Scalar::one();
                for (i, &c) in pivot_cols.iter().enumerate() {
                    v[c] = -&m[i][f];
                }
                v
            })
            .collect();
        Ok(LinearSolution::Underdetermined { particular, basis, free, assumed_nonzero: assumptions })
    }

    /// Residual of row `i` at the given values (zero when satisfied).
    pub fn residual(&self, i: usize, values: &[Scalar]) -> Scalar {
        let r = &self.rows[i];
        let mut acc = -&r.rhs;
        for (c, v) in r.coeffs.iter().zip(values) {
            acc = &acc + &(c * v);
        }
        acc
    }

    pub fn verify(&self, values: &[Scalar]) -> bool {
        (0..self.rows.len()).all(|i| self.residual(i, values).is_zero())
    }
}

/// Splits polynomials that are affine in the variables `unknowns` into
/// linear equations `poly = 0`.
pub fn linear_rows(polys: &[Scalar], unknowns: &[usize]) -> Result<Vec<LinearEquation>, RingError> {
    let mut rows = Vec::with_capacity(polys.len());
    for p in polys {
        let mut coeffs = vec![Scalar::zero(); unknowns.len()];
        let mut rhs = Scalar::zero();
        for (m, c) in &p.terms {
            let hits: Vec<(usize, u32)> = m
                .iter()
                .filter_map(|(v, e)| unknowns.iter().position(|u| *u == *v as usize).map(|k| (k, *e)))
                .collect();
            let total: u32 = hits.iter().map(|h| h.1).sum();
            let rest: Mono = m.iter().copied().filter(|(v, _)| !unknowns.contains(&(*v as usize))).collect();
            let term = Scalar { params: p.params.clone(), terms: [(rest, c.clone())].into_iter().collect() };
            match total {
                0 => rhs = &rhs - &term,
                1 => coeffs[hits[0].0] = &coeffs[hits[0].0] + &term,
                _ => return Err(RingError::Nonlinear(p.render())),
            }
        }
        rows.push(LinearEquation { coeffs, rhs });
    }
    Ok(rows)
}

/// Like [`linear_rows`], but each polynomial must vanish identically in the
/// remaining parameters, so it splits into one constant-coefficient row per
/// monomial in those parameters.
pub fn identity_rows(polys: &[Scalar], unknowns: &[usize]) -> Result<Vec<LinearEquation>, RingError> {
    let mut rows = Vec::new();
    for p in polys {
        let mut groups: BTreeMap<Mono, (Vec<Rational>, Rational)> = BTreeMap::new();
        for (m, c) in &p.terms {
            let hits: Vec<(usize, u32)> = m
                .iter()
                .filter_map(|(v, e)| unknowns.iter().position(|u| *u == *v as usize).map(|k| (k, *e)))
                .collect();
            let total: u32 = hits.iter().map(|h| h.1).sum();
            let rest: Mono = m.iter().copied().filter(|(v, _)| !unknowns.contains(&(*v as usize))).collect();
            let entry =
                groups.entry(rest).or_insert_with(|| (vec![Rational::zero(); unknowns.len()], Rational::zero()));
            match total {
                0 => entry.1 -= c,
                1 => entry.0[hits[0].0] += c,
                _ => return Err(RingError::Nonlinear(p.render())),
            }
        }
        for (_, (coeffs, rhs)) in groups {
            rows.push(LinearEquation {
                coeffs: coeffs.into_iter().map(Scalar::from_rational).collect(),
                rhs: Scalar::from_rational(rhs),
            });
        }
    }
    Ok(rows)
}

/// Converts a rational to `f64` for display-only purposes (never used in checks).
pub fn approx(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps() -> Arc<ParamSet> {
        ParamSet::builder()
            .free("delta")
            .free("eps1")
            .free("eps2")
            .free("eps3")
            .sign("a")
            .circle("c", "s")
            .build()
            .unwrap()
    }

    #[test]
    fn rational_sum() {
        let x = Scalar::from_frac(1, 2) + Scalar::from_frac(1, 3);
        assert_eq!(x.as_rational(), Some(rat(5, 6)));
    }

    #[test]
    fn circle_square_rewrites() {
        let p = ps();
        let c = p.var("c").unwrap();
        let s = p.var("s").unwrap();
        let lhs = &c * &c;
        let rhs = Scalar::one() - &s * &s;
        assert_eq!(lhs, rhs);
        assert!((&c * &c + &s * &s).is_one());
    }

    #[test]
    fn sign_square_is_one() {
        let p = ps();
        let a = p.var("a").unwrap();
        assert!((&a * &a).is_one());
        assert_eq!(a.pow(3), a);
    }

    #[test]
    fn difference_of_squares() {
        let p = ps();
        let d = p.var("delta").unwrap();
        let e = p.var("eps1").unwrap();
        let lhs = (&d + &e) * (&d - &e);
        assert_eq!(lhs, &d * &d - &e * &e);
    }

    #[test]
    fn eval_examples() {
        let p = ps();
        let d = p.var("delta").unwrap();
        let mut asg = HashMap::new();
        asg.insert("delta".to_string(), rint(3));
        assert_eq!((&d * &d).eval(&asg).unwrap().as_rational(), Some(rint(9)));

        let c = p.var("c").unwrap();
        let s = p.var("s").unwrap();
        let mut asg = HashMap::new();
        asg.insert("c".to_string(), rat(3, 5));
        asg.insert("s".to_string(), rat(4, 5));
        assert!((&c * &c + &s * &s).eval(&asg).unwrap().is_one());
        asg.insert("s".to_string(), rat(1, 2));
        assert!(matches!(c.eval(&asg), Err(RingError::CircleViolation { .. })));

        let a = p.var("a").unwrap();
        let mut asg = HashMap::new();
        asg.insert("a".to_string(), rint(-1));
        let v = (a.scale(&rint(2)) + Scalar::one()).eval(&asg).unwrap();
        assert_eq!(v.as_rational(), Some(rint(-1)));
    }

    #[test]
    fn mismatched_sets_are_rejected() {
        let p = ps();
        let q = ParamSet::builder().free("r").build().unwrap();
        let x = p.var("delta").unwrap();
        let y = q.var("r").unwrap();
        assert_eq!(x.try_add(&y).unwrap_err(), RingError::MismatchedParams);
        let ext = p.extend_free(&["u".to_string()]).unwrap();
        let u = ext.var("u").unwrap();
        assert!(x.try_add(&u).is_ok());
    }

    #[test]
    fn exact_division() {
        let p = ps();
        let d = p.var("delta").unwrap();
        let e = p.var("eps1").unwrap();
        let num = (&d + &e) * (&d - &e) * (&d + Scalar::from_int(2));
        let q = num.div_exact(&(&d - &e)).unwrap();
        assert_eq!(q, (&d + &e) * (&d + Scalar::from_int(2)));
        assert!((&d + Scalar::one()).div_exact(&e).is_none());
    }

    #[test]
    fn solve_two_by_two() {
        let mut sys = LinearSystem::new(vec!["x".into()]);
        sys.rows.push(LinearEquation { coeffs: vec![Scalar::from_int(2)], rhs: Scalar::from_int(4) });
        let sol = sys.solve().unwrap();
        assert_eq!(sol.unique().unwrap()[0].as_rational(), Some(rint(2)));
    }

    #[test]
    fn solve_with_common_polynomial_factor() {
        let p = ps();
        let s2: Scalar =
            ["eps1", "eps2", "eps3"].iter().map(|n| p.var(n).unwrap().pow(2)).fold(Scalar::zero(), |a, b| a + b);
        let mut sys = LinearSystem::new(vec!["r".into()]);
        sys.rows.push(LinearEquation { coeffs: vec![s2.clone()], rhs: s2.clone() });
        match sys.solve().unwrap() {
            LinearSolution::Unique { values, assumed_nonzero } => {
                assert!(values[0].is_one());
                assert_eq!(assumed_nonzero, vec![s2]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parametric_pivot_reported() {
        let p = ps();
        let d = p.var("delta").unwrap();
        let mut sys = LinearSystem::new(vec!["x".into()]);
        sys.rows.push(LinearEquation { coeffs: vec![d.clone()], rhs: Scalar::one() });
        assert!(matches!(sys.solve(), Err(RingError::ParametricPivot(_))));
    }

    #[test]
    fn inconsistent_system() {
        let mut sys = LinearSystem::new(vec!["x".into()]);
        sys.rows.push(LinearEquation { coeffs: vec![Scalar::one()], rhs: Scalar::one() });
        sys.rows.push(LinearEquation { coeffs: vec![Scalar::one()], rhs: Scalar::from_int(2) });
        assert!(matches!(sys.solve().unwrap(), LinearSolution::NoSolution { .. }));
    }

    #[test]
    fn underdetermined_reports_basis() {
        let mut sys = LinearSystem::new(vec!["x".into(), "y".into()]);
        sys.rows.push(LinearEquation { coeffs: vec![Scalar::one(), Scalar::one()], rhs: Scalar::one() });
        match sys.solve().unwrap() {
            LinearSolution::Underdetermined { particular, basis, free, .. } => {
                assert_eq!(free, vec![1]);
                assert!(sys.verify(&particular));
                let shifted: Vec<Scalar> = particular.iter().zip(&basis[0]).map(|(a, b)| a + b).collect();
                assert!(sys.verify(&shifted));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn determinant_and_inverse() {
        let m: Vec<Vec<Scalar>> = [[2, 1, 0], [1, 3, 1], [0, 1, 4]]
            .iter()
            .map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect())
            .collect();
        assert_eq!(determinant(&m).as_rational(), Some(rint(18)));
        let inv = invert_matrix(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Scalar::zero();
                for k in 0..3 {
                    acc = acc + &m[i][k] * &inv[k][j];
                }
                assert_eq!(acc.is_one(), i == j);
                assert_eq!(acc.is_zero(), i != j);
            }
        }
    }

    #[test]
    fn odd_roots() {
        assert_eq!(rational_odd_root(&rat(-512, 1953125), 9), Some(rat(-2, 5)));
        assert_eq!(rational_odd_root(&rint(2), 9), None);
    }

    #[test]
    fn linear_rows_split_affine_polys() {
        let p = ps().extend_free(&["u".into()]).unwrap();
        let u = p.var("u").unwrap();
        let d = p.var("delta").unwrap();
        let poly = &u * &d - Scalar::from_int(3);
        let u_idx = p.index("u").unwrap();
        let rows = linear_rows(&[poly], &[u_idx]).unwrap();
        assert_eq!(rows[0].coeffs[0], d);
        assert_eq!(rows[0].rhs.as_rational(), Some(rint(3)));
        assert!(linear_rows(&[&u * &u], &[u_idx]).is_err());
    }

    #[test]
    fn render_is_stable() {
        let p = ps();
        let d = p.var("delta").unwrap();
        let e = p.var("eps1").unwrap();
        let x = (&d * &d).scale(&rint(2)) - e.scale(&rat(1, 3));
        assert_eq!(x.render(), "2*delta*delta - 1/3*eps1");
    }
}
