//! Sparse exterior algebra over a coframe of at most 16 one-form generators.
//!
//! A wedge monomial `e^{i1..ik}` with `i1 < .. < ik` is stored as the bitmask
//! with bits `i1..ik` set. Coefficients are [`Scalar`]s, so every operation is
//! exact and may carry parameters.
//!
//! Auxiliary generators (named 2- and 4-forms such as `w1p` in the
//! 3-Sasakian model) are aliases that expand to raw monomials. The transverse
//! admissibility rule for the exterior derivative lives in [`TransverseModel`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::ring::{invert_matrix, render_terms, Rational, RingError, Scalar};

pub type Mask = u16;

pub const MAX_DIM: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtError {
    #[error("differential unavailable for `{0}`")]
    Unavailable(String),
    #[error("forms live on coframes of different dimension ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("contraction index {0} is outside the coframe")]
    BadIndex(usize),
    #[error("expected a {expected}-form, found degree {found:?}")]
    Grade { expected: usize, found: Option<usize> },
    #[error("differential table entry for `{0}` has the wrong degree")]
    TableDegree(String),
    #[error("metric is not invertible")]
    SingularMetric,
    #[error("metric is not symmetric")]
    AsymmetricMetric,
    #[error("volume coefficient must be nonzero")]
    ZeroVolume,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Number of set bits of `a` strictly above each bit of `b`, summed, mod 2.
#[inline]
pub fn wedge_sign(a: Mask, b: Mask) -> bool {
    let mut odd = false;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j + 1 >= 16 { 0 } else { (a >> (j + 1)).count_ones() };
        odd ^= above & 1 == 1;
    }
    odd
}

pub fn mask_indices(m: Mask) -> Vec<usize> {
    (0..MAX_DIM).filter(|i| m & (1 << i) != 0).collect()
}

pub fn mask_of(indices: &[usize]) -> Mask {
    indices.iter().fold(0, |m, i| m | (1 << i))
}

/// Sorts `indices` and returns `(mask, negative)`, or `None` on a repeat.
pub fn canonical(indices: &[usize]) -> Option<(Mask, bool)> {
    let mut v = indices.to_vec();
    let mut neg = false;
    for i in 0..v.len() {
        for j in 0..v.len().saturating_sub(1 + i) {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                neg = !neg;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((mask_of(&v), neg))
}

/// All masks with exactly `k` bits among the low `n` bits, in increasing tuple order.
pub fn subsets(n: usize, k: usize) -> Vec<Mask> {
    fn rec(start: usize, n: usize, k: usize, cur: Mask, out: &mut Vec<Mask>) {
        if k == 0 {
            out.push(cur);
            return;
        }
        for i in start..n {
            if n - i < k {
                break;
            }
            rec(i + 1, n, k - 1, cur | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, 0, &mut out);
    out
}

/// Ordered generator names plus named auxiliary forms.
#[derive(Debug, Clone, PartialEq)]
pub struct Coframe {
    names: Vec<String>,
    aliases: Vec<(String, Form)>,
}

impl Coframe {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Coframe {
        assert!(names.len() <= MAX_DIM, "coframe dimension exceeds {MAX_DIM}");
        Coframe { names: names.iter().map(|s| s.as_ref().to_string()).collect(), aliases: Vec::new() }
    }

    /// `e1..en`.
    pub fn standard(n: usize) -> Coframe {
        let names: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
        Coframe::new(&names)
    }

    pub fn with_alias(mut self, name: &str, expansion: Form) -> Coframe {
        assert_eq!(expansion.dim(), self.dim());
        self.aliases.push((name.to_string(), expansion));
        self
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn alias(&self, name: &str) -> Option<&Form> {
        self.aliases.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    pub fn aliases(&self) -> &[(String, Form)] {
        &self.aliases
    }

    pub fn gen(&self, name: &str) -> Option<Form> {
        self.index(name).map(|i| Form::gen(self.dim(), i)).or_else(|| self.alias(name).cloned())
    }

    pub fn monomial_name(&self, m: Mask) -> String {
        if m == 0 {
            return "1".to_string();
        }
        mask_indices(m).iter().map(|&i| self.names[i].as_str()).collect::<Vec<_>>().join("^")
    }
}

/// A (possibly inhomogeneous) exterior form.
#[derive(Clone, PartialEq)]
pub struct Form {
    dim: u8,
    terms: BTreeMap<Mask, Scalar>,
}

impl Form {
    pub fn zero(dim: usize) -> Form {
        assert!(dim <= MAX_DIM);
        Form { dim: dim as u8, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, s: Scalar) -> Form {
        Form::zero(dim).with_term(0, s)
    }

    pub fn gen(dim: usize, i: usize) -> Form {
        assert!(i < dim);
        Form::zero(dim).with_term(1 << i, Scalar::one())
    }

    /// Signed wedge of generators by 0-based index, e.g. `[0, 1]` is `e1^e2`.
    pub fn mono(dim: usize, indices: &[usize]) -> Form {
        match canonical(indices) {
            None => Form::zero(dim),
            Some((m, neg)) => {
                let c = if neg { -Scalar::one() } else { Scalar::one() };
                Form::zero(dim).with_term(m, c)
            }
        }
    }

    /// Monomial from 1-based digits, e.g. `e(7, 135)` is `e1^e3^e5`.
    pub fn e(dim: usize, digits: u64) -> Form {
        let idx: Vec<usize> = digits.to_string().bytes().map(|b| (b - b'1') as usize).collect();
        Form::mono(dim, &idx)
    }

    pub fn from_terms<I: IntoIterator<Item = (Mask, Scalar)>>(dim: usize, it: I) -> Form {
        let mut f = Form::zero(dim);
        for (m, c) in it {
            f.add_term(m, c);
        }
        f
    }

    fn with_term(mut self, m: Mask, c: Scalar) -> Form {
        self.add_term(m, c);
        self
    }

    pub fn add_term(&mut self, m: Mask, c: Scalar) {
        if c.is_zero() {
            return;
        }
        debug_assert!((m as u32) < (1u32 << self.dim));
        match self.terms.get_mut(&m) {
            Some(x) => {
                let v = &*x + &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *x = v;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &Scalar)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: Mask) -> Scalar {
        self.terms.get(&m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn top_coeff(&self) -> Scalar {
        self.coeff(((1u32 << self.dim) - 1) as Mask)
    }

    /// Degree when homogeneous; `None` for the zero form or mixed degrees.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|m| m.count_ones() as usize);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous_of(&self, k: usize) -> bool {
        self.is_zero() || self.degree() == Some(k)
    }

    pub fn expect_degree(&self, k: usize) -> Result<(), ExtError> {
        if self.is_homogeneous_of(k) {
            Ok(())
        } else {
            Err(ExtError::Grade { expected: k, found: self.degree() })
        }
    }

    /// Degree-`k` part.
    pub fn part(&self, k: usize) -> Form {
        Form::from_terms(
            self.dim(),
            self.terms.iter().filter(|(m, _)| m.count_ones() as usize == k).map(|(m, c)| (*m, c.clone())),
        )
    }

    pub fn scale(&self, s: &Scalar) -> Form {
        if s.is_zero() {
            return Form::zero(self.dim());
        }
        Form::from_terms(self.dim(), self.terms.iter().map(|(m, c)| (*m, c * s)))
    }

    pub fn scale_rat(&self, r: &Rational) -> Form {
        if r.is_zero() {
            return Form::zero(self.dim());
        }
        Form { dim: self.dim, terms: self.terms.iter().map(|(m, c)| (*m, c.scale(r))).collect() }
    }

    pub fn map_coeffs<F: Fn(&Scalar) -> Scalar>(&self, f: F) -> Form {
        Form::from_terms(self.dim(), self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    pub fn try_map_coeffs<F, E>(&self, f: F) -> Result<Form, E>
    where
        F: Fn(&Scalar) -> Result<Scalar, E>,
    {
        let mut out = Form::zero(self.dim());
        for (m, c) in &self.terms {
            out.add_term(*m, f(c)?);
        }
        Ok(out)
    }

    pub fn eval(&self, assignment: &HashMap<String, Rational>) -> Result<Form, RingError> {
        self.try_map_coeffs(|c| c.eval(assignment))
    }

    fn check_dim(&self, o: &Form) {
        assert_eq!(self.dim, o.dim, "forms over coframes of different dimension");
    }

    pub fn try_add(&self, o: &Form) -> Result<Form, ExtError> {
        if self.dim != o.dim {
            return Err(ExtError::DimensionMismatch(self.dim(), o.dim()));
        }
        let mut out = self.clone();
        for (m, c) in &o.terms {
            if let Some(x) = out.terms.get_mut(m) {
                let v = x.try_add(c)?;
                if v.is_zero() {
                    out.terms.remove(m);
                } else {
                    *x = v;
                }
            } else {
                out.terms.insert(*m, c.clone());
            }
        }
        Ok(out)
    }

    pub fn try_wedge(&self, o: &Form) -> Result<Form, ExtError> {
        if self.dim != o.dim {
            return Err(ExtError::DimensionMismatch(self.dim(), o.dim()));
        }
        let mut acc: BTreeMap<Mask, Scalar> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                if ma & mb != 0 {
                    continue;
                }
                let p = ca.try_mul(cb)?;
                let p = if wedge_sign(*ma, *mb) { -p } else { p };
                let key = ma | mb;
                match acc.get_mut(&key) {
                    Some(x) => *x = x.try_add(&p)?,
                    None => {
                        acc.insert(key, p);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Form { dim: self.dim, terms: acc })
    }

    pub fn wedge(&self, o: &Form) -> Form {
        self.try_wedge(o).expect("wedge of incompatible forms")
    }

    /// Interior product with the dual frame vector `e_v`.
    pub fn contract(&self, v: usize) -> Result<Form, ExtError> {
        if v >= self.dim() {
            return Err(ExtError::BadIndex(v));
        }
        let bit: Mask = 1 << v;
        let below = bit - 1;
        let mut out = Form::zero(self.dim());
        for (m, c) in &self.terms {
            if m & bit != 0 {
                let neg = (m & below).count_ones() % 2 == 1;
                out.add_term(m & !bit, if neg { -c } else { c.clone() });
            }
        }
        Ok(out)
    }

    /// Replaces each generator `e^i` by the 1-form `images[i]` and expands.
    pub fn pullback(&self, images: &[Form]) -> Form {
        assert_eq!(images.len(), self.dim());
        let target_dim = images.first().map(|f| f.dim()).unwrap_or(self.dim());
        let mut out = Form::zero(target_dim);
        for (m, c) in &self.terms {
            let mut t = Form::constant(target_dim, c.clone());
            for i in mask_indices(*m) {
                t = t.wedge(&images[i]);
                if t.is_zero() {
                    break;
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Re-embeds into a larger coframe, sending generator `i` to `positions[i]`.
    pub fn embed(&self, target_dim: usize, positions: &[usize]) -> Form {
        let images: Vec<Form> = positions.iter().map(|&p| Form::gen(target_dim, p)).collect();
        self.pullback(&images)
    }

    pub fn render(&self, cf: &Coframe) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut keys: Vec<Mask> = self.terms.keys().copied().collect();
        keys.sort_by_key(|m| (m.count_ones(), mask_indices(*m)));
        let mut out = String::new();
        for (i, m) in keys.iter().enumerate() {
            let c = &self.terms[m];
            let piece = if *m == 0 { render_terms(c, None) } else { render_terms(c, Some(&cf.monomial_name(*m))) };
            if i == 0 {
                out.push_str(&piece);
            } else if let Some(rest) = piece.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&piece);
            }
        }
        out
    }

    /// Renders against the standard coframe `e1..en`.
    pub fn render_std(&self) -> String {
        self.render(&Coframe::standard(self.dim()))
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render_std())
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render_std())
    }
}

macro_rules! form_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl std::ops::$tr<&Form> for &Form {
            type Output = Form;
            fn $m(self, o: &Form) -> Form {
                self.check_dim(o);
                $body(self, o)
            }
        }
        impl std::ops::$tr<Form> for Form {
            type Output = Form;
            fn $m(self, o: Form) -> Form {
                (&self).$m(&o)
            }
        }
        impl std::ops::$tr<&Form> for Form {
            type Output = Form;
            fn $m(self, o: &Form) -> Form {
                (&self).$m(o)
            }
        }
        impl std::ops::$tr<Form> for &Form {
            type Output = Form;
            fn $m(self, o: Form) -> Form {
                self.$m(&o)
            }
        }
    };
}
form_binop!(Add, add, |a: &Form, b: &Form| a.try_add(b).expect("form addition"));
form_binop!(Sub, sub, |a: &Form, b: &Form| a.try_add(&-b).expect("form subtraction"));
form_binop!(BitXor, bitxor, |a: &Form, b: &Form| a.wedge(b));

impl std::ops::Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        Form { dim: self.dim, terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
}
impl std::ops::Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        -&self
    }
}
impl std::ops::Mul<&Form> for &Scalar {
    type Output = Form;
    fn mul(self, f: &Form) -> Form {
        f.scale(self)
    }
}
impl std::ops::Mul<Form> for Scalar {
    type Output = Form;
    fn mul(self, f: Form) -> Form {
        f.scale(&self)
    }
}
impl std::ops::Mul<&Form> for Scalar {
    type Output = Form;
    fn mul(self, f: &Form) -> Form {
        f.scale(&self)
    }
}
impl std::ops::Mul<Form> for &Scalar {
    type Output = Form;
    fn mul(self, f: Form) -> Form {
        f.scale(self)
    }
}

/// Transverse block of a coframe on which `d` is only known on a subspace.
///
/// Monomials are split as `tr ^ v` with `tr` transverse and `v` vertical.
/// A transverse factor is differentiable when it has degree 0, degree equal
/// to one of `closed_degrees` (taken as closed), or degree 2 and lies in the
/// span of `two_forms` whose own differentials are known.
#[derive(Clone, Debug)]
pub struct TransverseModel {
    mask: Mask,
    pairs: Vec<Mask>,
    two_forms: Vec<(String, Form, Option<Form>)>,
    /// `coords[b][p]`: coefficient of basis form `b` in the monomial `pairs[p]`.
    coords: Vec<Vec<Rational>>,
    closed_degrees: Vec<usize>,
}

impl TransverseModel {
    /// `two_forms` must be a basis of the 2-forms on the transverse generators.
    pub fn new(
        transverse: &[usize],
        two_forms: Vec<(String, Form, Option<Form>)>,
        closed_degrees: Vec<usize>,
    ) -> Result<TransverseModel, ExtError> {
        let mask = mask_of(transverse);
        let mut pairs = Vec::new();
        for (a, &i) in transverse.iter().enumerate() {
            for &j in &transverse[a + 1..] {
                pairs.push(mask_of(&[i, j]));
            }
        }
        pairs.sort_by_key(|m| mask_indices(*m));
        if two_forms.len() != pairs.len() {
            return Err(ExtError::SingularMetric);
        }
        // Column b of the matrix is the basis form b in monomial coordinates.
        let mat: Vec<Vec<Scalar>> =
            pairs.iter().map(|p| two_forms.iter().map(|(_, f, _)| f.coeff(*p)).collect()).collect();
        let inv = invert_matrix(&mat)?;
        let coords =
            inv.iter().map(|row| row.iter().map(|x| x.as_rational().expect("rational basis")).collect()).collect();
        Ok(TransverseModel { mask, pairs, two_forms, coords, closed_degrees })
    }

    pub fn mask(&self) -> Mask {
        self.mask
    }

    /// Coordinates of a transverse 2-form in the basis.
    pub fn decompose(&self, f: &Form) -> Vec<Scalar> {
        self.coords
            .iter()
            .map(|row| {
                let mut acc = Scalar::zero();
                for (p, r) in self.pairs.iter().zip(row) {
                    if !r.is_zero() {
                        acc = acc + f.coeff(*p).scale(r);
                    }
                }
                acc
            })
            .collect()
    }

    fn d_transverse(&self, tr: &Form, cf: &Coframe) -> Result<Form, ExtError> {
        let dim = tr.dim();
        match tr.degree() {
            None if tr.is_zero() => Ok(Form::zero(dim)),
            Some(0) => Ok(Form::zero(dim)),
            Some(k) if self.closed_degrees.contains(&k) => Ok(Form::zero(dim)),
            Some(2) => {
                let co = self.decompose(tr);
                let mut out = Form::zero(dim);
                for (c, (name, _, d)) in co.iter().zip(&self.two_forms) {
                    if c.is_zero() {
                        continue;
                    }
                    match d {
                        Some(df) => out = out + df.scale(c),
                        None => return Err(ExtError::Unavailable(name.clone())),
                    }
                }
                Ok(out)
            }
            _ => {
                let m = tr.terms().next().map(|(m, _)| m).unwrap_or(0);
                let first = mask_indices(m).first().copied().unwrap_or(0);
                Err(ExtError::Unavailable(cf.name(first).to_string()))
            }
        }
    }
}

/// Exterior derivative on generators; `None` marks an unknown differential.
#[derive(Clone, Debug)]
pub struct DiffTable {
    coframe: Arc<Coframe>,
    entries: Vec<Option<Form>>,
    transverse: Option<TransverseModel>,
}

impl DiffTable {
    pub fn new(coframe: Arc<Coframe>, entries: Vec<Option<Form>>) -> Result<DiffTable, ExtError> {
        assert_eq!(entries.len(), coframe.dim());
        for (i, e) in entries.iter().enumerate() {
            if let Some(f) = e {
                if f.dim() != coframe.dim() || !f.is_homogeneous_of(2) {
                    return Err(ExtError::TableDegree(coframe.name(i).to_string()));
                }
            }
        }
        Ok(DiffTable { coframe, entries, transverse: None })
    }

    /// Table with every differential known.
    pub fn complete(coframe: Arc<Coframe>, entries: Vec<Form>) -> Result<DiffTable, ExtError> {
        DiffTable::new(coframe, entries.into_iter().map(Some).collect())
    }

    /// All differentials zero on `e1..en`.
    pub fn abelian(n: usize) -> DiffTable {
        DiffTable::complete(Arc::new(Coframe::standard(n)), vec![Form::zero(n); n]).unwrap()
    }

    /// `d e^k = -sum_{i<j} c[i][j][k] e^{ij}` from structure constants `[e_i, e_j] = c_ij^k e_k`.
    pub fn from_brackets(coframe: Arc<Coframe>, c: &[Vec<Vec<Rational>>]) -> Result<DiffTable, ExtError> {
        let n = coframe.dim();
        let mut entries = vec![Form::zero(n); n];
        for i in 0..n {
            for j in i + 1..n {
                for (k, entry) in entries.iter_mut().enumerate() {
                    let x = &c[i][j][k];
                    if !x.is_zero() {
                        *entry = &*entry - &Form::mono(n, &[i, j]).scale_rat(x);
                    }
                }
            }
        }
        DiffTable::complete(coframe, entries)
    }

    pub fn with_transverse(mut self, t: TransverseModel) -> DiffTable {
        self.transverse = Some(t);
        self
    }

    pub fn coframe(&self) -> &Arc<Coframe> {
        &self.coframe
    }

    pub fn dim(&self) -> usize {
        self.coframe.dim()
    }

    pub fn entry(&self, i: usize) -> Option<&Form> {
        self.entries[i].as_ref()
    }

    pub fn entries(&self) -> &[Option<Form>] {
        &self.entries
    }

    pub fn transverse(&self) -> Option<&TransverseModel> {
        self.transverse.as_ref()
    }

    /// `true` when every known differential has parameter-free coefficients.
    pub fn is_rational(&self) -> bool {
        self.entries.iter().flatten().all(|f| f.terms().all(|(_, c)| c.is_constant()))
    }

    fn d_plain(&self, m: Mask, c: &Scalar, out: &mut Form) -> Result<(), ExtError> {
        let dim = self.dim();
        let mut rest = m;
        while rest != 0 {
            let g = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let dg = self.entries[g].as_ref().ok_or_else(|| ExtError::Unavailable(self.coframe.name(g).to_string()))?;
            if dg.is_zero() {
                continue;
            }
            let bit: Mask = 1 << g;
            let pos = (m & (bit - 1)).count_ones();
            // e^I = (-1)^pos e^g ^ e^{I\g}; d e^g is even so it commutes past e^{<g}.
            let remainder = Form::zero(dim).with_term(m & !bit, c.clone());
            let t = dg.wedge(&remainder);
            *out = if pos % 2 == 1 { &*out - &t } else { &*out + &t };
        }
        Ok(())
    }

    /// Chevalley-Eilenberg differential of `a`.
    pub fn d(&self, a: &Form) -> Result<Form, ExtError> {
        let dim = self.dim();
        if a.dim() != dim {
            return Err(ExtError::DimensionMismatch(a.dim(), dim));
        }
        let mut out = Form::zero(dim);
        match &self.transverse {
            None => {
                for (m, c) in a.terms() {
                    self.d_plain(m, c, &mut out)?;
                }
            }
            Some(tm) => {
                let tmask = tm.mask;
                let mut groups: BTreeMap<Mask, Form> = BTreeMap::new();
                for (m, c) in a.terms() {
                    let v = m & !tmask;
                    let tr = m & tmask;
                    // e^m = (+/-) e^tr ^ e^v
                    let c = if wedge_sign(tr, v) { -c } else { c.clone() };
                    groups.entry(v).or_insert_with(|| Form::zero(dim)).add_term(tr, c);
                }
                for (v, tr) in groups {
                    let ev = Form::zero(dim).with_term(v, Scalar::one());
                    let dtr = tm.d_transverse(&tr, &self.coframe)?;
                    out = out + dtr.wedge(&ev);
                    let mut dv = Form::zero(dim);
                    self.d_plain(v, &Scalar::one(), &mut dv)?;
                    if !dv.is_zero() {
                        let k = tr.degree().unwrap_or(0);
                        let t = tr.wedge(&dv);
                        out = if k % 2 == 1 { out - t } else { out + t };
                    }
                }
            }
        }
        Ok(out)
    }

    /// Applies `d` twice to every available generator and returns the first nonzero residual.
    pub fn d_squared_check(&self) -> Result<(), (String, Form)> {
        for (i, e) in self.entries.iter().enumerate() {
            let Some(de) = e else { continue };
            match self.d(de) {
                Ok(dd) if dd.is_zero() => {}
                Ok(dd) => return Err((self.coframe.name(i).to_string(), dd)),
                Err(_) => return Err((self.coframe.name(i).to_string(), Form::zero(self.dim()))),
            }
        }
        if let Some(tm) = &self.transverse {
            for (name, _, d) in &tm.two_forms {
                if let Some(df) = d {
                    match self.d(df) {
                        Ok(dd) if dd.is_zero() => {}
                        Ok(dd) => return Err((name.clone(), dd)),
                        Err(_) => return Err((name.clone(), Form::zero(self.dim()))),
                    }
                }
            }
        }
        Ok(())
    }

    /// Rewrites the table in a new coframe `f^a = sum_b m[a][b] e^b`.
    pub fn change_basis(&self, m: &[Vec<Rational>], new: Arc<Coframe>) -> Result<DiffTable, ExtError> {
        let n = self.dim();
        let ms: Vec<Vec<Scalar>> = m.iter().map(|r| r.iter().map(|x| Scalar::from(x.clone())).collect()).collect();
        let inv = invert_matrix(&ms)?;
        // e^b = sum_c inv[b][c] f^c
        let e_in_f: Vec<Form> =
            (0..n).map(|b| Form::from_terms(n, (0..n).map(|c| (1 << c, inv[b][c].clone())))).collect();
        let mut entries = Vec::with_capacity(n);
        for row in m {
            let mut acc = Form::zero(n);
            for (b, x) in row.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                let de =
                    self.entries[b].as_ref().ok_or_else(|| ExtError::Unavailable(self.coframe.name(b).to_string()))?;
                acc = acc + de.scale_rat(x);
            }
            entries.push(Some(acc.pullback(&e_in_f)));
        }
        DiffTable::new(new, entries)
    }
}

/// Metric on the coframe generators with an oriented volume `vol * e^{1..n}`.
#[derive(Clone, Debug)]
pub struct FrameMetric {
    g: Vec<Vec<Scalar>>,
    ginv: Vec<Vec<Scalar>>,
    vol: Scalar,
    diagonal: bool,
}

impl FrameMetric {
    pub fn identity(n: usize) -> FrameMetric {
        let g: Vec<Vec<Scalar>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect();
        FrameMetric { ginv: g.clone(), g, vol: Scalar::one(), diagonal: true }
    }

    pub fn new(g: Vec<Vec<Scalar>>, vol: Scalar) -> Result<FrameMetric, ExtError> {
        let n = g.len();
        if vol.is_zero() {
            return Err(ExtError::ZeroVolume);
        }
        for i in 0..n {
            for j in 0..i {
                if g[i][j] != g[j][i] {
                    return Err(ExtError::AsymmetricMetric);
                }
            }
        }
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || g[i][j].is_zero()));
        let ginv = if diagonal {
            let mut inv = vec![vec![Scalar::zero(); n]; n];
            for i in 0..n {
                let r = g[i][i].as_rational().filter(|r| !r.is_zero()).ok_or(ExtError::SingularMetric)?;
                inv[i][i] = Scalar::from(r.recip());
            }
            inv
        } else {
            invert_matrix(&g).map_err(|_| ExtError::SingularMetric)?
        };
        Ok(FrameMetric { g, ginv, vol, diagonal })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn g(&self) -> &[Vec<Scalar>] {
        &self.g
    }

    pub fn ginv(&self) -> &[Vec<Scalar>] {
        &self.ginv
    }

    pub fn vol_coeff(&self) -> &Scalar {
        &self.vol
    }

    pub fn vol_form(&self) -> Form {
        let n = self.dim();
        Form::constant(n, self.vol.clone()).wedge(&Form::mono(n, &(0..n).collect::<Vec<_>>()))
    }

    pub fn is_identity(&self) -> bool {
        self.diagonal && self.g.iter().enumerate().all(|(i, r)| r[i].is_one())
    }

    /// Induced inner product of the basis monomials `e^a` and `e^b`.
    pub fn monomial_inner(&self, a: Mask, b: Mask) -> Scalar {
        if a.count_ones() != b.count_ones() {
            return Scalar::zero();
        }
        if self.diagonal {
            if a != b {
                return Scalar::zero();
            }
            return mask_indices(a).iter().fold(Scalar::one(), |acc, &i| acc * &self.ginv[i][i]);
        }
        let ia = mask_indices(a);
        let ib = mask_indices(b);
        let sub: Vec<Vec<Scalar>> = ia.iter().map(|&i| ib.iter().map(|&j| self.ginv[i][j].clone()).collect()).collect();
        crate::ring::determinant(&sub)
    }

    pub fn inner(&self, a: &Form, b: &Form) -> Scalar {
        let mut acc = Scalar::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                let ip = self.monomial_inner(ma, mb);
                if !ip.is_zero() {
                    acc = acc + ca * cb * ip;
                }
            }
        }
        acc
    }

    /// Hodge star determined by `beta ^ *a = <beta, a> vol` for every monomial `beta`.
    pub fn hodge(&self, a: &Form) -> Result<Form, ExtError> {
        let n = self.dim();
        if a.dim() != n {
            return Err(ExtError::DimensionMismatch(a.dim(), n));
        }
        let full: Mask = ((1u32 << n) - 1) as Mask;
        let mut out = Form::zero(n);
        for (mj, c) in a.terms() {
            let candidates: Vec<Mask> = if self.diagonal { vec![mj] } else { subsets(n, mj.count_ones() as usize) };
            for mi in candidates {
                let ip = self.monomial_inner(mi, mj);
                if ip.is_zero() {
                    continue;
                }
                let comp = full & !mi;
                let coef = c * &ip * &self.vol;
                out.add_term(comp, if wedge_sign(mi, comp) { -coef } else { coef });
            }
        }
        Ok(out)
    }

    /// The scalar `*a` for a top-degree or mixed form (coefficient of the 0-form part).
    pub fn hodge_scalar(&self, a: &Form) -> Result<Scalar, ExtError> {
        Ok(self.hodge(a)?.coeff(0))
    }
}

/// Wedge of a list of 1-form generators by name, resolved against a coframe.
pub fn parse_monomial(cf: &Coframe, names: &[&str]) -> Option<Form> {
    let mut f = Form::constant(cf.dim(), Scalar::one());
    for n in names {
        f = f.wedge(&cf.gen(n)?);
    }
    Some(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rat, rint};

    fn e(d: u64) -> Form {
        Form::e(7, d)
    }

    #[test]
    fn wedge_basics() {
        assert_eq!(e(1) ^ e(2), e(12));
        assert_eq!(e(2) ^ e(1), -e(12));
        let s1p = e(13) - e(24);
        assert_eq!(&s1p ^ &s1p, e(1234).scale_rat(&rint(2)));
        let x = e(15) + e(26);
        assert_eq!(&x ^ &x, e(1256).scale_rat(&rint(-2)));
        assert!((e(1) ^ e(1)).is_zero());
    }

    #[test]
    fn contraction_signs() {
        assert_eq!(e(12).contract(0).unwrap(), e(2));
        assert_eq!(e(12).contract(1).unwrap(), -e(1));
        assert_eq!(e(1).contract(0).unwrap(), Form::constant(7, Scalar::one()));
    }

    #[test]
    fn hh_table_and_d_squared() {
        let n = 7;
        let cf = Arc::new(Coframe::standard(n));
        let mut entries = vec![Form::zero(n); n];
        entries[4] = e(12) - e(34);
        entries[5] = e(13) + e(24);
        entries[6] = e(14) - e(23);
        let t = DiffTable::complete(cf.clone(), entries).unwrap();
        assert_eq!(t.d(&e(5)).unwrap(), e(12) - e(34));
        assert!(t.d(&e(12)).unwrap().is_zero());
        assert!(t.d_squared_check().is_ok());

        // d(e12) = e23^e2 = 0, so this table still squares to zero.
        let mut closed = vec![Form::zero(n); n];
        closed[4] = e(12);
        closed[0] = e(23);
        assert!(DiffTable::complete(cf.clone(), closed).unwrap().d_squared_check().is_ok());

        let mut bad = vec![Form::zero(n); n];
        bad[4] = e(12);
        bad[0] = e(34);
        let t = DiffTable::complete(cf, bad).unwrap();
        let (g, res) = t.d_squared_check().unwrap_err();
        assert_eq!(g, "e5");
        assert_eq!(res, e(234));
    }

    #[test]
    fn hodge_identity_metric() {
        let m = FrameMetric::identity(7);
        assert_eq!(m.hodge(&e(1)).unwrap(), e(234567));
        for k in 0..=7 {
            for mask in subsets(7, k) {
                let f = Form::zero(7).with_term(mask, Scalar::one());
                assert_eq!(m.hodge(&m.hodge(&f).unwrap()).unwrap(), f);
            }
        }
    }

    #[test]
    fn hodge_in_six_dimensions() {
        let m = FrameMetric::identity(6);
        for k in 0..=6 {
            for mask in subsets(6, k) {
                let f = Form::zero(6).with_term(mask, Scalar::one());
                let ss = m.hodge(&m.hodge(&f).unwrap()).unwrap();
                let expected = if k % 2 == 1 { -f } else { f };
                assert_eq!(ss, expected);
            }
        }
    }

    #[test]
    fn hodge_defining_property_nondiagonal() {
        let n = 4;
        let g: Vec<Vec<Scalar>> = [[2, 1, 0, 0], [1, 2, 0, 1], [0, 0, 3, 0], [0, 1, 0, 2]]
            .iter()
            .map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect())
            .collect();
        let m = FrameMetric::new(g, Scalar::from_frac(3, 2)).unwrap();
        let vol = m.vol_form();
        for k in 0..=n {
            for a in subsets(n, k) {
                let fa = Form::zero(n).with_term(a, Scalar::one());
                let star = m.hodge(&fa).unwrap();
                for b in subsets(n, k) {
                    let fb = Form::zero(n).with_term(b, Scalar::one());
                    assert_eq!(fb.wedge(&star), vol.scale(&m.monomial_inner(b, a)));
                }
            }
        }
    }

    #[test]
    fn bracket_conversion() {
        let n = 3;
        let cf = Arc::new(Coframe::standard(n));
        let mut c = vec![vec![vec![Rational::zero(); n]; n]; n];
        c[0][1][2] = rint(1);
        c[1][0][2] = rint(-1);
        let t = DiffTable::from_brackets(cf, &c).unwrap();
        assert_eq!(t.entry(2).unwrap(), &-Form::e(3, 12));
    }

    #[test]
    fn change_of_basis_round_trip() {
        let n = 3;
        let cf = Arc::new(Coframe::standard(n));
        let t = DiffTable::complete(
            cf.clone(),
            vec![
                Form::e(3, 23).scale_rat(&rint(-2)),
                Form::e(3, 13).scale_rat(&rint(2)),
                Form::e(3, 12).scale_rat(&rint(-2)),
            ],
        )
        .unwrap();
        let m =
            vec![vec![rat(1, 2), rat(1, 2), rint(0)], vec![rint(0), rint(1), rint(0)], vec![rint(0), rint(0), rint(1)]];
        let t2 = t.change_basis(&m, cf.clone()).unwrap();
        assert!(t2.d_squared_check().is_ok());
        let mi =
            vec![vec![rint(2), rint(-1), rint(0)], vec![rint(0), rint(1), rint(0)], vec![rint(0), rint(0), rint(1)]];
        let back = t2.change_basis(&mi, cf).unwrap();
        for i in 0..n {
            assert_eq!(back.entry(i), t.entry(i));
        }
    }

    #[test]
    fn pullback_and_embed() {
        let f = Form::e(3, 12);
        let g = f.embed(7, &[1, 2, 6]);
        assert_eq!(g, e(23));
        let swap = vec![Form::gen(3, 1), Form::gen(3, 0), Form::gen(3, 2)];
        assert_eq!(f.pullback(&swap), -Form::e(3, 12));
    }

    #[test]
    fn render_with_parameters() {
        let p = crate::ring::ParamSet::builder().free("delta").build().unwrap();
        let d = p.var("delta").unwrap();
        let f = e(12).scale(&d) - e(3).scale_rat(&rat(1, 2));
        assert_eq!(f.render_std(), "-1/2*e3 + delta*e1^e2");
    }
}
