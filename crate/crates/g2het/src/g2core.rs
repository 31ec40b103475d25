//! G2-structures on 7-dimensional coframes.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exec;
use crate::exterior::{DiffTable, ExtError, Form, FrameMetric};
use crate::ring::{determinant, rat, rational_odd_root, rint, Rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum G2Error {
    #[error("not a positive G2 form")]
    NotPositive,
    #[error("det(B)/6^7 = {0} has no rational ninth root")]
    IrrationalRoot(String),
    #[error("det(B) is not constant: {0}")]
    ParametricDeterminant(String),
    #[error("supplied metric violates 6 g_ij vol = B_ij at ({0}, {1})")]
    MetricMismatch(usize, usize),
    #[error("structure is not integrable: tau2 = {0}")]
    NotIntegrable(String),
    #[error("internal identity failed: {0}")]
    Identity(&'static str),
    #[error(transparent)]
    Ext(#[from] ExtError),
}

/// A 3-form with its metric, volume and dual 4-form.
#[derive(Clone, Debug)]
pub struct G2Structure {
    phi: Form,
    psi: Form,
    metric: FrameMetric,
}

/// `B_ij`: top coefficient of `(e_i _| phi) ^ (e_j _| phi) ^ phi`.
pub fn b_matrix(phi: &Form) -> Result<Vec<Vec<Scalar>>, G2Error> {
    let n = phi.dim();
    let contractions: Vec<Form> = (0..n).map(|i| phi.contract(i)).collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let vals = exec::map(pairs.clone(), |(i, j)| contractions[i].wedge(&contractions[j]).wedge(phi).top_coeff());
    let mut b = vec![vec![Scalar::zero(); n]; n];
    for ((i, j), v) in pairs.into_iter().zip(vals) {
        b[j][i] = v.clone();
        b[i][j] = v;
    }
    Ok(b)
}

fn positive_definite(g: &[Vec<Scalar>]) -> Result<bool, G2Error> {
    for k in 1..=g.len() {
        let minor: Vec<Vec<Scalar>> = g[..k].iter().map(|r| r[..k].to_vec()).collect();
        let d = determinant(&minor);
        match d.as_rational() {
            Some(r) if r.is_positive() => {}
            Some(_) => return Ok(false),
            None => return Err(G2Error::ParametricDeterminant(d.render())),
        }
    }
    Ok(true)
}

/// Metric and volume determined by `6 g(X,Y) vol = (X _| phi) ^ (Y _| phi) ^ phi`.
pub fn metric_from_phi(phi: &Form) -> Result<FrameMetric, G2Error> {
    phi.expect_degree(3)?;
    let n = phi.dim();
    if n != 7 {
        return Err(G2Error::NotPositive);
    }
    let b = b_matrix(phi)?;
    let det = determinant(&b);
    let det = det.as_rational().ok_or_else(|| G2Error::ParametricDeterminant(det.render()))?;
    if det.is_zero() {
        return Err(G2Error::NotPositive);
    }
    let x = det / Rational::from_integer(6.into()).pow(7);
    let v = rational_odd_root(&x, 9).ok_or_else(|| G2Error::IrrationalRoot(x.to_string()))?;
    let scale = (rint(6) * &v).recip();
    let g: Vec<Vec<Scalar>> = b.iter().map(|r| r.iter().map(|x| x.scale(&scale)).collect()).collect();
    if !positive_definite(&g)? {
        return Err(G2Error::NotPositive);
    }
    Ok(FrameMetric::new(g, Scalar::from(v))?)
}

impl G2Structure {
    /// Derives metric and volume from `phi`.
    pub fn from_phi(phi: Form) -> Result<G2Structure, G2Error> {
        let metric = metric_from_phi(&phi)?;
        let psi = metric.hodge(&phi)?;
        Ok(G2Structure { phi, psi, metric })
    }

    /// Uses a supplied metric after checking `6 g_ij vol = B_ij` entrywise.
    pub fn with_metric(phi: Form, metric: FrameMetric) -> Result<G2Structure, G2Error> {
        phi.expect_degree(3)?;
        let b = b_matrix(&phi)?;
        let six_vol = metric.vol_coeff().scale(&rint(6));
        for i in 0..7 {
            for j in 0..7 {
                if &metric.g()[i][j] * &six_vol != b[i][j] {
                    return Err(G2Error::MetricMismatch(i, j));
                }
            }
        }
        let psi = metric.hodge(&phi)?;
        Ok(G2Structure { phi, psi, metric })
    }

    pub fn phi(&self) -> &Form {
        &self.phi
    }

    pub fn psi(&self) -> &Form {
        &self.psi
    }

    pub fn metric(&self) -> &FrameMetric {
        &self.metric
    }

    pub fn star(&self, a: &Form) -> Form {
        self.metric.hodge(a).expect("dimension checked at construction")
    }
}

/// Torsion forms together with the differentials they were extracted from.
#[derive(Clone, Debug)]
pub struct Torsion {
    pub tau0: Scalar,
    pub tau1: Form,
    pub tau2: Form,
    pub tau3: Form,
    pub dphi: Form,
    pub dpsi: Form,
    /// `(7/12) tau0`, exposed read-only.
    pub lambda_cosmo: Scalar,
}

impl Torsion {
    pub fn is_integrable(&self) -> bool {
        self.tau2.is_zero()
    }

    pub fn is_coclosed(&self) -> bool {
        self.dpsi.is_zero()
    }
}

/// Computes the torsion forms and verifies both structure equations.
pub fn torsion_forms(s: &G2Structure, t: &DiffTable) -> Result<Torsion, G2Error> {
    let dphi = t.d(&s.phi)?;
    let dpsi = t.d(&s.psi)?;
    let star = |a: &Form| s.star(a);
    let tau0 = star(&dphi.wedge(&s.phi)).coeff(0).scale(&rat(1, 7));
    let tau1 = star(&s.phi.wedge(&star(&dphi))).scale_rat(&rat(1, 12));
    let four_t1 = tau1.scale_rat(&rint(4));
    let three_t1 = tau1.scale_rat(&rint(3));
    let tau2 = -star(&(&dpsi - &four_t1.wedge(&s.psi)));
    let tau3 = star(&(&(&dphi - &s.psi.scale(&tau0)) - &three_t1.wedge(&s.phi)));

    let rebuilt_dphi = s.psi.scale(&tau0) + three_t1.wedge(&s.phi) + star(&tau3);
    if rebuilt_dphi != dphi {
        return Err(G2Error::Identity("d phi = tau0 psi + 3 tau1^phi + *tau3"));
    }
    if four_t1.wedge(&s.psi) + tau2.wedge(&s.phi) != dpsi {
        return Err(G2Error::Identity("d psi = 4 tau1^psi + tau2^phi"));
    }
    if !tau2.wedge(&s.psi).is_zero() {
        return Err(G2Error::Identity("tau2 ^ psi = 0"));
    }
    if !tau3.wedge(&s.phi).is_zero() || !tau3.wedge(&s.psi).is_zero() {
        return Err(G2Error::Identity("tau3 ^ phi = tau3 ^ psi = 0"));
    }
    let lambda_cosmo = tau0.scale(&rat(7, 12));
    Ok(Torsion { tau0, tau1, tau2, tau3, dphi, dpsi, lambda_cosmo })
}

/// Torsion 3-form of the characteristic connection, computed two ways.
pub fn torsion_threeform(s: &G2Structure, tor: &Torsion) -> Result<Form, G2Error> {
    if !tor.is_integrable() {
        return Err(G2Error::NotIntegrable(tor.tau2.render_std()));
    }
    let star = |a: &Form| s.star(a);
    let c = star(&tor.dphi.wedge(&s.phi)).coeff(0).scale(&rat(1, 6));
    let four_t1 = tor.tau1.scale_rat(&rint(4));
    let t_first = s.phi.scale(&c) - star(&tor.dphi) + star(&four_t1.wedge(&s.phi));
    let t_second = s.phi.scale(&tor.tau0.scale(&rat(1, 6))) + star(&tor.tau1.wedge(&s.phi)) - &tor.tau3;
    if t_first != t_second {
        return Err(G2Error::Identity("two expressions for the torsion 3-form"));
    }
    Ok(t_first)
}

/// Splits a 2-form into its 7- and 14-dimensional components.
pub fn project_two_form(alpha: &Form, s: &G2Structure) -> Result<(Form, Form), G2Error> {
    alpha.expect_degree(2)?;
    let third = rat(1, 3);
    let sa = s.star(&alpha.wedge(&s.phi));
    let a7 = (alpha + &sa).scale_rat(&third);
    let a14 = (alpha.scale_rat(&rint(2)) - &sa).scale_rat(&third);
    Ok((a7, a14))
}

/// `Ok` when every curvature component wedges `psi` to zero; otherwise the first failure.
pub fn instanton_check(f: &[Form], s: &G2Structure) -> Result<(), (usize, Form)> {
    for (i, fi) in f.iter().enumerate() {
        let r = fi.wedge(&s.psi);
        if !r.is_zero() {
            return Err((i, r));
        }
    }
    Ok(())
}

/// The flat standard structure `e127 + e347 + e567 + e135 - e146 - e236 - e245`.
pub fn standard_phi() -> Form {
    let e = |d| Form::e(7, d);
    e(135) - e(245) - e(146) - e(236) + e(127) + e(347) + e(567)
}
