//! Möbius polynomials, growth series, valuations and their Möbius transforms.

use std::collections::HashMap;
use std::fmt;

use crate::error::{input, Error, Result};
use crate::trace::{Clique, Letter, TraceMonoid, DEFAULT_WORK_BUDGET};

/// Tolerance for deciding `h(𝐞) = 0`.
pub const EPSILON_ZERO_TOL: f64 = 1e-9;

/// Absolute tolerance of [`Polynomial::smallest_positive_root`].
pub const ROOT_TOL: f64 = 1e-12;

/// Real polynomial with coefficients indexed by degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coefficients: Vec<f64>) -> Self {
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        Polynomial { coefficients }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Smallest root in `(0, 1]`, to absolute tolerance `1e-12`.
    ///
    /// Roots are isolated through the roots of the derivative, so roots of
    /// even multiplicity (no sign change) are found as well.
    pub fn smallest_positive_root(&self) -> Option<f64> {
        self.real_roots(0.0, 1.0)
            .into_iter()
            .find(|&r| r > ROOT_TOL / 2.0)
    }

    /// Real roots in `[lo, hi]`, increasing.
    pub fn real_roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let scale = self.coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return Vec::new();
        }
        let zero_tol = 1e-13 * scale;
        let mut points = vec![lo];
        if self.degree() >= 2 {
            points.extend(self.derivative().real_roots(lo, hi));
        }
        points.push(hi);
        let mut roots: Vec<f64> = Vec::new();
        let push = |r: f64, roots: &mut Vec<f64>| {
            if roots.last().is_none_or(|&last| r - last > ROOT_TOL) {
                roots.push(r);
            }
        };
        for w in points.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let (v0, v1) = (self.eval(x0), self.eval(x1));
            if v0.abs() <= zero_tol {
                push(x0, &mut roots);
            } else if v1.abs() > zero_tol && (v0 < 0.0) != (v1 < 0.0) {
                push(self.bisect(x0, x1, v0), &mut roots);
            }
        }
        if self.eval(hi).abs() <= zero_tol {
            push(hi, &mut roots);
        }
        roots
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, v_lo: f64) -> f64 {
        let neg_lo = v_lo < 0.0;
        for _ in 0..200 {
            if hi - lo <= ROOT_TOL / 4.0 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let v = self.eval(mid);
            if v == 0.0 {
                return mid;
            }
            if (v < 0.0) == neg_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coefficients.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mag = c.abs();
            if first {
                if c < 0.0 {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c < 0.0 { " - " } else { " + " })?;
            }
            first = false;
            if mag != 1.0 || k == 0 {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => f.write_str("t")?,
                _ => write!(f, "t^{k}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Möbius polynomial `μ_M(t) = Σ_c (−1)^{|c|} t^{|c|}`.
pub fn moebius_polynomial(monoid: &TraceMonoid) -> Result<Polynomial> {
    let cliques = monoid.enumerate_cliques(DEFAULT_WORK_BUDGET)?;
    let max = cliques.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut coeffs = vec![0.0; max + 1];
    for c in cliques {
        coeffs[c.len()] += if c.len() % 2 == 0 { 1.0 } else { -1.0 };
    }
    Ok(Polynomial::new(coeffs))
}

/// Integer coefficients of `μ_M` as counted from cliques.
fn moebius_integer_coefficients(monoid: &TraceMonoid) -> Result<Vec<i128>> {
    let cliques = monoid.enumerate_cliques(DEFAULT_WORK_BUDGET)?;
    let max = cliques.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut coeffs = vec![0i128; max + 1];
    for c in cliques {
        coeffs[c.len()] += if c.len() % 2 == 0 { 1 } else { -1 };
    }
    Ok(coeffs)
}

/// Smallest positive root `p₀` of `μ_M`.
pub fn smallest_root(monoid: &TraceMonoid) -> Result<f64> {
    moebius_polynomial(monoid)?
        .smallest_positive_root()
        .ok_or_else(|| Error::Internal("Möbius polynomial has no root in (0, 1]".into()))
}

/// First `n + 1` coefficients of `1/μ_M(t)`, the number of traces of each
/// length.
pub fn growth_coefficients(monoid: &TraceMonoid, n: usize) -> Result<Vec<u128>> {
    let mu = moebius_integer_coefficients(monoid)?;
    let mut c: Vec<i128> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k == 0 {
            c.push(1);
            continue;
        }
        let mut acc: i128 = 0;
        for (j, &m) in mu.iter().enumerate().skip(1).take(k) {
            let term = m
                .checked_mul(c[k - j])
                .ok_or_else(|| Error::Resource(format!("growth coefficient {k} overflows")))?;
            acc = acc
                .checked_sub(term)
                .ok_or_else(|| Error::Resource(format!("growth coefficient {k} overflows")))?;
        }
        c.push(acc);
    }
    c.into_iter()
        .map(|v| u128::try_from(v).map_err(|_| Error::Internal("negative growth coefficient".into())))
        .collect()
}

/// Positive letter weights `f(a)`, indexed by letter id.
#[derive(Debug, Clone, PartialEq)]
pub struct Valuation {
    weights: Vec<f64>,
}

impl Valuation {
    pub fn new(monoid: &TraceMonoid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != monoid.len() {
            return input(format!(
                "valuation has {} weights for {} letters",
                weights.len(),
                monoid.len()
            ));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return input(format!(
                "weight of {} must be positive and finite, got {w}",
                monoid.name(Letter(i))
            ));
        }
        Ok(Valuation { weights })
    }

    /// The constant valuation `f ≡ q`.
    pub fn uniform(monoid: &TraceMonoid, q: f64) -> Result<Self> {
        Valuation::new(monoid, vec![q; monoid.len()])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, a: Letter) -> f64 {
        self.weights[a.0]
    }

    /// `f(c)`, the product of weights of a clique.
    pub fn of_clique(&self, c: Clique) -> f64 {
        c.letters().map(|a| self.weights[a.0]).product()
    }
}

/// Evaluates `μ_{M^{(c)}}` at the weights of `f`, where `M^{(c)}` is generated
/// by the letters parallel to every letter of `restrict_to`.
pub fn multivariate_eval(monoid: &TraceMonoid, f: &Valuation, restrict_to: Clique) -> f64 {
    eval_on_mask(monoid, f.weights(), monoid.parallel_mask(restrict_to))
}

/// `Σ_{c ⊆ mask clique} (−1)^{|c|} f(c)`, by splitting on the lowest letter.
fn eval_on_mask(monoid: &TraceMonoid, w: &[f64], mask: u64) -> f64 {
    if mask == 0 {
        return 1.0;
    }
    let v = mask.trailing_zeros() as usize;
    let rest = mask & !(1u64 << v);
    eval_on_mask(monoid, w, rest)
        - w[v] * eval_on_mask(monoid, w, rest & monoid.independent_mask(Letter(v)))
}

/// Values `h(c)` of the Möbius transform on every clique.
#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusTransform {
    values: Vec<(Clique, f64)>,
    index: HashMap<Clique, usize>,
}

impl MoebiusTransform {
    fn from_values(values: Vec<(Clique, f64)>) -> Self {
        let index = values.iter().enumerate().map(|(i, (c, _))| (*c, i)).collect();
        MoebiusTransform { values, index }
    }

    /// `ε = h(𝐞)`.
    pub fn epsilon(&self) -> f64 {
        self.get(Clique::EMPTY).expect("the empty clique is always present")
    }

    pub fn get(&self, c: Clique) -> Option<f64> {
        self.index.get(&c).map(|&i| self.values[i].1)
    }

    /// All `(clique, h(clique))` pairs, ordered by clique size then bitmask.
    pub fn values(&self) -> &[(Clique, f64)] {
        &self.values
    }
}

/// Möbius transform by alternating sums over super-cliques:
/// `h(c) = Σ_{c′ ⊇ c} (−1)^{|c′|−|c|} f(c′)`.
pub fn moebius_transform(monoid: &TraceMonoid, f: &Valuation) -> Result<MoebiusTransform> {
    let cliques = monoid.enumerate_cliques(DEFAULT_WORK_BUDGET)?;
    let fc: Vec<f64> = cliques.iter().map(|&c| f.of_clique(c)).collect();
    let values = cliques
        .iter()
        .map(|&c| {
            let h = cliques
                .iter()
                .zip(&fc)
                .filter(|(d, _)| c.is_subset(**d))
                .map(|(d, &v)| if (d.len() - c.len()) % 2 == 0 { v } else { -v })
                .sum();
            (c, h)
        })
        .collect();
    Ok(MoebiusTransform::from_values(values))
}

/// Möbius transform in factored form `h(c) = f(c) · μ_{M^{(c)}}(f)`.
pub fn moebius_transform_factored(
    monoid: &TraceMonoid,
    f: &Valuation,
) -> Result<MoebiusTransform> {
    let cliques = monoid.enumerate_cliques(DEFAULT_WORK_BUDGET)?;
    let values = cliques
        .into_iter()
        .map(|c| (c, f.of_clique(c) * multivariate_eval(monoid, f, c)))
        .collect();
    Ok(MoebiusTransform::from_values(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValuationClass {
    Moebius,
    SubMoebius,
    Neither,
}

impl fmt::Display for ValuationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValuationClass::Moebius => "Moebius",
            ValuationClass::SubMoebius => "SubMoebius",
            ValuationClass::Neither => "Neither",
        })
    }
}

/// Classification together with the numbers it was decided from.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class: ValuationClass,
    pub epsilon: f64,
    /// Smallest `h(c)` over nonempty cliques.
    pub min_h: f64,
    /// A nonempty clique with `h(c) ≤ 0`, if any.
    pub violating: Option<Clique>,
}

pub fn diagnose_valuation(monoid: &TraceMonoid, f: &Valuation) -> Result<ClassReport> {
    let h = moebius_transform(monoid, f)?;
    let epsilon = h.epsilon();
    let mut min_h = f64::INFINITY;
    let mut violating = None;
    for &(c, v) in h.values().iter().filter(|(c, _)| !c.is_empty()) {
        if v < min_h {
            min_h = v;
        }
        if v <= 0.0 && violating.is_none() {
            violating = Some(c);
        }
    }
    let class = if violating.is_some() || epsilon < -EPSILON_ZERO_TOL {
        ValuationClass::Neither
    } else if epsilon.abs() <= EPSILON_ZERO_TOL {
        ValuationClass::Moebius
    } else {
        ValuationClass::SubMoebius
    };
    Ok(ClassReport {
        class,
        epsilon,
        min_h,
        violating,
    })
}

pub fn classify_valuation(monoid: &TraceMonoid, f: &Valuation) -> Result<ValuationClass> {
    Ok(diagnose_valuation(monoid, f)?.class)
}

/// Restriction of `f` to the sub-monoid generated by `Σ \ {a}`.
pub fn restrict_valuation(
    monoid: &TraceMonoid,
    f: &Valuation,
    a: Letter,
) -> Result<(TraceMonoid, Valuation)> {
    let sub = monoid.without(a)?;
    let weights = monoid
        .letters()
        .filter(|&b| b != a)
        .map(|b| f.weight(b))
        .collect();
    let fv = Valuation::new(&sub, weights)?;
    Ok((sub, fv))
}

/// Extends a sub-Möbius valuation on `Σ \ {a}` to the unique Möbius
/// valuation on the whole monoid.
///
/// `f_prime` is indexed by the letters of `Σ \ {a}` in increasing id order.
/// The new weight is `h′(𝐞)/K` with `K` the multivariate Möbius polynomial
/// of the letters parallel to `a`.
pub fn extend_valuation(monoid: &TraceMonoid, a: Letter, f_prime: &[f64]) -> Result<Valuation> {
    if a.0 >= monoid.len() {
        return input(format!("letter id {} is not in the monoid", a.0));
    }
    if !monoid.is_irreducible() {
        return input("extension requires an irreducible monoid");
    }
    let sub = monoid.without(a)?;
    let fp = Valuation::new(&sub, f_prime.to_vec())?;
    let report = diagnose_valuation(&sub, &fp)?;
    if report.class != ValuationClass::SubMoebius {
        return input(format!(
            "restricted valuation must be sub-Möbius, got {} (h(e) = {:.3e})",
            report.class, report.epsilon
        ));
    }
    let mut weights = Vec::with_capacity(monoid.len());
    let mut it = f_prime.iter();
    for b in monoid.letters() {
        weights.push(if b == a { 1.0 } else { *it.next().unwrap() });
    }
    let k = eval_on_mask(monoid, &weights, monoid.parallel_mask(Clique::singleton(a)));
    if k <= 0.0 {
        return Err(Error::Internal(format!(
            "extension denominator is not positive ({k})"
        )));
    }
    weights[a.0] = report.epsilon / k;
    Valuation::new(monoid, weights)
}
