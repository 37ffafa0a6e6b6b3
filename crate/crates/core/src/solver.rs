//! Local distributions realizing a target valuation on path and ring
//! networks, plus the small-values scaling that works on any network.
//!
//! Path targets `t_0 .. t_M` live on letters `b_0 .. b_M` with alphabets
//! `{b_{i-1}, b_i}` for `i = 1 .. M`. The solutions are written with the
//! prefix values `μ_i`, the multivariate Möbius polynomial of the sub-path
//! `b_0 .. b_i` evaluated at the targets.

use crate::error::{input, Error, Result};
use crate::moebius::{
    diagnose_valuation, extend_valuation, smallest_root, ClassReport, Valuation, ValuationClass,
};
use crate::sampler::{psa_valuation, DistKind, LocalDistribution};
use crate::sync::AlphabetNetwork;
use crate::trace::{Letter, TraceMonoid};

/// Letterwise tolerance when checking a solution against its targets.
pub const CHECK_TOL: f64 = 1e-10;

/// Local distributions for a network, with the values used to derive them.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedParams {
    pub network: AlphabetNetwork,
    pub dists: Vec<LocalDistribution>,
    /// `μ_{-1}, μ_0, …, μ_M` for path solutions, empty otherwise.
    pub prefix: Vec<f64>,
}

/// `μ_{-1} = 1`, `μ_0 = 1 − t_0` and `μ_{i+1} = μ_i − t_{i+1} μ_{i-1}`.
pub fn prefix_moebius(t: &[f64]) -> Result<Vec<f64>> {
    check_targets(t)?;
    let mut mu = vec![1.0, 1.0 - t[0]];
    for i in 1..t.len() {
        let next = mu[i] - t[i] * mu[i - 1];
        mu.push(next);
    }
    Ok(mu)
}

fn check_targets(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        return input("at least one target is required");
    }
    if let Some(x) = t.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return input(format!("targets must be positive, got {x}"));
    }
    Ok(())
}

fn path_network(names: &[String]) -> Result<AlphabetNetwork> {
    let m = names.len() - 1;
    let alphabets = if m == 0 {
        vec![vec![Letter(0)]]
    } else {
        (1..=m).map(|i| vec![Letter(i - 1), Letter(i)]).collect()
    };
    AlphabetNetwork::new(names, alphabets)
}

fn describe(report: &ClassReport, monoid: &TraceMonoid) -> String {
    match report.violating {
        Some(c) => {
            let names: Vec<&str> = c.letters().map(|a| monoid.name(a)).collect();
            format!("h({}) = {:.3e} is not positive", names.join("."), report.min_h)
        }
        None => format!("h(e) = {:.3e}", report.epsilon),
    }
}

fn classify_targets(net: &AlphabetNetwork, t: &[f64], want: ValuationClass) -> Result<()> {
    let f = Valuation::new(net.monoid(), t.to_vec())?;
    let report = diagnose_valuation(net.monoid(), &f)?;
    if report.class != want {
        let what = match want {
            ValuationClass::Moebius => "Möbius",
            _ => "sub-Möbius",
        };
        return input(format!(
            "targets are not {what}: classified {} ({})",
            report.class,
            describe(&report, net.monoid())
        ));
    }
    Ok(())
}

fn line(a: Letter, x: f64, b: Letter, y: f64, kind: Option<DistKind>) -> Result<LocalDistribution> {
    let entries = vec![(a, x), (b, y)];
    let d = match kind {
        Some(k) => LocalDistribution::with_kind(entries, k),
        None => LocalDistribution::new(entries),
    };
    d.map_err(|e| Error::Internal(format!("solver produced an invalid distribution: {e}")))
}

fn verify(net: &AlphabetNetwork, dists: &[LocalDistribution], t: &[f64]) -> Result<()> {
    let f = psa_valuation(net, dists)?;
    for (a, (&got, &want)) in f.weights().iter().zip(t).enumerate() {
        if (got - want).abs() > CHECK_TOL {
            return Err(Error::Internal(format!(
                "solution gives {got} on {} instead of {want}",
                net.monoid().name(Letter(a))
            )));
        }
    }
    Ok(())
}

fn solve_path(names: &[String], t: &[f64], bernoulli: bool) -> Result<SolvedParams> {
    check_targets(t)?;
    if names.len() != t.len() {
        return Err(Error::Internal("one name per target is required".into()));
    }
    let net = path_network(names)?;
    let want = if bernoulli {
        ValuationClass::Moebius
    } else {
        ValuationClass::SubMoebius
    };
    classify_targets(&net, t, want)?;
    let mu_all = prefix_moebius(t)?;
    // mu(i) = μ_i for i ≥ -1
    let mu = |i: isize| mu_all[(i + 1) as usize];
    let m = t.len() - 1;
    let prob = Some(DistKind::Probability);
    let mut dists = Vec::with_capacity(m.max(1));
    if m == 0 {
        let kind = if bernoulli { prob } else { Some(DistKind::SubProbability) };
        let d = LocalDistribution::new(vec![(Letter(0), t[0])])
            .and_then(|d| match kind {
                Some(k) if d.kind() != k => input("single letter target has the wrong mass"),
                _ => Ok(d),
            })
            .map_err(|e| Error::Internal(e.to_string()))?;
        dists.push(d);
    } else if m == 1 {
        dists.push(line(Letter(0), t[0], Letter(1), t[1], if bernoulli { prob } else { None })?);
    } else {
        dists.push(line(Letter(0), t[0], Letter(1), 1.0 - t[0], prob)?);
        for i in 2..m {
            let ii = i as isize;
            dists.push(line(
                Letter(i - 1),
                t[i - 1] * mu(ii - 3) / mu(ii - 2),
                Letter(i),
                mu(ii - 1) / mu(ii - 2),
                prob,
            )?);
        }
        let last = if bernoulli {
            line(Letter(m - 1), 1.0 - t[m], Letter(m), t[m], prob)?
        } else {
            let prev = dists[m - 2].weight(Letter(m - 1)).expect("previous line holds b_{M-1}");
            line(Letter(m - 1), t[m - 1] / prev, Letter(m), t[m], None)?
        };
        dists.push(last);
    }
    verify(&net, &dists, t)?;
    Ok(SolvedParams {
        network: net,
        dists,
        prefix: mu_all,
    })
}

fn indexed(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("a{i}")).collect()
}

/// Probability distributions on the path `a0 .. aM` whose PSA output is the
/// Bernoulli measure with `P(↑a_i) = t_i`.
pub fn solve_path_bernoulli(t: &[f64]) -> Result<SolvedParams> {
    solve_path(&indexed(t.len()), t, true)
}

/// Distributions on the path `a0 .. aM` whose PSA output is the finite
/// sub-Bernoulli measure with `P(↑a_i) = t_i`; only the last line may be a
/// sub-probability.
pub fn solve_path_sub_bernoulli(t: &[f64]) -> Result<SolvedParams> {
    solve_path(&indexed(t.len()), t, false)
}

/// A ring solution: the removed letter and the path parameters for the
/// remaining letters.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSolution {
    pub removed: Letter,
    pub params: SolvedParams,
}

/// Solves Möbius targets on the ring `a0 .. a{N-1}` by removing `a0`.
pub fn solve_ring(targets: &[f64]) -> Result<RingSolution> {
    solve_ring_removing(targets, Letter(0))
}

/// Solves Möbius targets on the ring by removing letter `k`.
///
/// The remaining letters `a_{k+1} .. a_{k+N-1}` form a path carrying the
/// restricted (sub-Möbius) targets, solved as a sub-Bernoulli path whose
/// network keeps the ring letter names.
pub fn solve_ring_removing(targets: &[f64], k: Letter) -> Result<RingSolution> {
    let n = targets.len();
    if n < 4 {
        return input(format!("the ring solver needs at least 4 letters, got {n}"));
    }
    if k.0 >= n {
        return input(format!("letter id {} is not on the ring", k.0));
    }
    let ring = TraceMonoid::ring(n)?;
    let f = Valuation::new(&ring, targets.to_vec())?;
    let report = diagnose_valuation(&ring, &f)?;
    if report.class != ValuationClass::Moebius {
        return input(format!(
            "ring targets are not Möbius: classified {} ({})",
            report.class,
            describe(&report, &ring)
        ));
    }
    let order: Vec<usize> = (1..n).map(|j| (k.0 + j) % n).collect();
    let names: Vec<String> = order.iter().map(|&i| ring.name(Letter(i)).to_string()).collect();
    let t: Vec<f64> = order.iter().map(|&i| targets[i]).collect();
    let params = solve_path(&names, &t, false)?;

    let restricted: Vec<f64> = (0..n).filter(|&i| i != k.0).map(|i| targets[i]).collect();
    let back = extend_valuation(&ring, k, &restricted)?;
    if (back.weight(k) - targets[k.0]).abs() > 1e-9 {
        return Err(Error::Internal(format!(
            "extension gives {} instead of {}",
            back.weight(k),
            targets[k.0]
        )));
    }
    Ok(RingSolution { removed: k, params })
}

/// Sub-probabilities `p_i(a) = (ε t(a))^{1/|R(a)|}` whose PSA valuation is
/// `ε t`.
pub fn scale_small_values(
    network: &AlphabetNetwork,
    t: &Valuation,
    epsilon: f64,
) -> Result<SolvedParams> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return input(format!("epsilon must be positive, got {epsilon}"));
    }
    if t.weights().len() != network.monoid().len() {
        return input("valuation does not match the network");
    }
    let mut dists = Vec::with_capacity(network.len());
    for (i, alph) in network.alphabets().iter().enumerate() {
        let entries: Vec<(Letter, f64)> = alph
            .iter()
            .map(|&a| {
                let r = network.resources(a).len() as f64;
                (a, (epsilon * t.weight(a)).powf(1.0 / r))
            })
            .collect();
        let sum: f64 = entries.iter().map(|e| e.1).sum();
        if sum >= 1.0 {
            return input(format!(
                "epsilon {epsilon} is too large: alphabet {i} has total weight {sum}"
            ));
        }
        dists.push(LocalDistribution::with_kind(entries, DistKind::SubProbability)?);
    }
    Ok(SolvedParams {
        network: network.clone(),
        dists,
        prefix: Vec::new(),
    })
}

/// The uniform Möbius valuation `f ≡ p₀`.
pub fn uniform_targets(monoid: &TraceMonoid) -> Result<Valuation> {
    Valuation::uniform(monoid, smallest_root(monoid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::classify_valuation;
    use approx::assert_abs_diff_eq;

    fn q1() -> f64 {
        1.0 - 2f64.sqrt() / 2.0
    }

    fn p0_ring5() -> f64 {
        0.5 - 5f64.sqrt() / 10.0
    }

    fn pair(d: &LocalDistribution) -> (f64, f64) {
        (d.entries()[0].1, d.entries()[1].1)
    }

    /// Forward iteration of `p_1(b_0) = t_0`, `p_i(b_{i-1}) = t_{i-1} / p_{i-1}(b_{i-1})`.
    fn forward(t: &[f64]) -> Vec<(f64, f64)> {
        let mut out = vec![(t[0], 1.0 - t[0])];
        for i in 2..t.len() {
            let x = t[i - 1] / out[i - 2].1;
            out.push((x, 1.0 - x));
        }
        out
    }

    #[test]
    fn prefix_values() {
        assert_eq!(prefix_moebius(&[0.3]).unwrap(), vec![1.0, 0.7]);
        let mu = prefix_moebius(&[0.2; 3]).unwrap();
        let expect = [1.0, 0.8, 0.6, 0.44];
        for (a, b) in mu.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let q0 = smallest_root(&TraceMonoid::path(5).unwrap()).unwrap();
        let mu = prefix_moebius(&[q0; 5]).unwrap();
        assert_abs_diff_eq!(mu[5], 0.0, epsilon = 1e-12);
        assert!(prefix_moebius(&[0.1, -0.2]).is_err());
    }

    #[test]
    fn path5_bernoulli_table() {
        let q0 = smallest_root(&TraceMonoid::path(5).unwrap()).unwrap();
        let s = solve_path_bernoulli(&[q0; 5]).unwrap();
        let expect = [(0.308, 0.692), (0.445, 0.555), (0.555, 0.445), (0.692, 0.308)];
        for (d, (x, y)) in s.dists.iter().zip(expect) {
            let (a, b) = pair(d);
            assert_abs_diff_eq!(a, x, epsilon = 5e-4);
            assert_abs_diff_eq!(b, y, epsilon = 5e-4);
            assert_abs_diff_eq!(a + b, 1.0, epsilon = 1e-12);
            assert_eq!(d.kind(), DistKind::Probability);
        }
        assert_abs_diff_eq!(pair(&s.dists[1]).0, q0 / (1.0 - q0), epsilon = 1e-12);
        // closed forms agree with the forward recurrence
        for (d, (x, y)) in s.dists.iter().zip(forward(&[q0; 5])) {
            let (a, b) = pair(d);
            assert_abs_diff_eq!(a, x, epsilon = 1e-10);
            assert_abs_diff_eq!(b, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn small_path_bernoulli_cases() {
        let s = solve_path_bernoulli(&[0.4, 0.6]).unwrap();
        assert_eq!(s.dists.len(), 1);
        assert_eq!(pair(&s.dists[0]), (0.4, 0.6));
        let p4 = smallest_root(&TraceMonoid::path(4).unwrap()).unwrap();
        let s = solve_path_bernoulli(&[p4; 4]).unwrap();
        for i in 1..3 {
            let here = s.dists[i - 1].weight(Letter(i)).unwrap();
            let next = s.dists[i].weight(Letter(i)).unwrap();
            assert_abs_diff_eq!(here * next, p4, epsilon = 1e-12);
        }
        let s = solve_path_bernoulli(&[1.0]).unwrap();
        assert_eq!(s.dists[0].kind(), DistKind::Probability);
    }

    #[test]
    fn bernoulli_rejects_non_moebius() {
        let err = solve_path_bernoulli(&[0.2; 5]).unwrap_err();
        assert!(matches!(err, Error::Input(ref m) if m.contains("SubMoebius")), "{err}");
        assert!(solve_path_bernoulli(&[0.5; 5]).is_err());
    }

    #[test]
    fn ring5_sub_bernoulli_table() {
        let p0 = p0_ring5();
        let s = solve_path_sub_bernoulli(&[p0; 4]).unwrap();
        let expect = [(0.276, 0.724), (0.382, 0.618), (0.447, 0.276)];
        for (d, (x, y)) in s.dists.iter().zip(expect) {
            let (a, b) = pair(d);
            assert_abs_diff_eq!(a, x, epsilon = 5e-4);
            assert_abs_diff_eq!(b, y, epsilon = 5e-4);
        }
        assert_abs_diff_eq!(pair(&s.dists[2]).0, 1.0 / 5f64.sqrt(), epsilon = 1e-12);
        assert_eq!(s.dists[2].kind(), DistKind::SubProbability);
    }

    #[test]
    fn ring4_sub_bernoulli_table() {
        let s = solve_path_sub_bernoulli(&[q1(); 3]).unwrap();
        let (a, b) = pair(&s.dists[0]);
        assert_abs_diff_eq!(a, q1(), epsilon = 1e-12);
        assert_abs_diff_eq!(b, 1.0 - q1(), epsilon = 1e-12);
        let (a, b) = pair(&s.dists[1]);
        assert_abs_diff_eq!(a, 2f64.sqrt() - 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, q1(), epsilon = 1e-12);
        assert!(a + b < 1.0);
        let s = solve_path_sub_bernoulli(&[0.3]).unwrap();
        assert_eq!(s.dists[0].kind(), DistKind::SubProbability);
        assert!(solve_path_sub_bernoulli(&[0.4; 4]).is_err());
    }

    #[test]
    fn ring_solver() {
        let p0 = p0_ring5();
        let sol = solve_ring(&[p0; 5]).unwrap();
        assert_eq!(sol.removed, Letter(0));
        let names: Vec<&str> = sol.params.network.names().iter().map(|s| s.as_str()).collect();
        assert_eq!(names, ["a1", "a2", "a3", "a4"]);
        let (a, b) = pair(&sol.params.dists[2]);
        assert_abs_diff_eq!(a, 1.0 / 5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b, p0, epsilon = 1e-12);

        let sol = solve_ring_removing(&[q1(); 4], Letter(3)).unwrap();
        let names: Vec<&str> = sol.params.network.names().iter().map(|s| s.as_str()).collect();
        assert_eq!(names, ["a0", "a1", "a2"]);
        assert_abs_diff_eq!(pair(&sol.params.dists[1]).0, 2f64.sqrt() - 1.0, epsilon = 1e-12);

        assert!(solve_ring(&[0.2; 5]).is_err());
        assert!(solve_ring(&[0.3; 3]).is_err());
    }

    #[test]
    fn ring_solver_with_non_uniform_targets() {
        // a Möbius valuation on ring-6 obtained by extending a sub-Möbius one
        let ring = TraceMonoid::ring(6).unwrap();
        let rest = [0.2, 0.25, 0.15, 0.22, 0.18];
        let f = extend_valuation(&ring, Letter(2), &rest).unwrap();
        assert_eq!(classify_valuation(&ring, &f).unwrap(), ValuationClass::Moebius);
        for k in 0..6 {
            let sol = solve_ring_removing(f.weights(), Letter(k)).unwrap();
            let g = psa_valuation(&sol.params.network, &sol.params.dists).unwrap();
            for (name, w) in sol.params.network.names().iter().zip(g.weights()) {
                let id = ring.letter(name).unwrap();
                assert_abs_diff_eq!(*w, f.weight(id), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn scaling() {
        let ring = AlphabetNetwork::ring(4).unwrap();
        let t = Valuation::uniform(ring.monoid(), 1.0).unwrap();
        let s = scale_small_values(&ring, &t, 0.04).unwrap();
        for d in &s.dists {
            assert!(d.entries().iter().all(|e| (e.1 - 0.2).abs() < 1e-15));
            assert_abs_diff_eq!(d.total(), 0.4, epsilon = 1e-15);
        }
        let f = psa_valuation(&ring, &s.dists).unwrap();
        assert!(f.weights().iter().all(|w| (w - 0.04).abs() < 1e-12));
        assert!(scale_small_values(&ring, &t, 0.5).is_err());

        let single = AlphabetNetwork::from_names(&["x", "y"], &[vec!["x"], vec!["y"]]).unwrap();
        let t = Valuation::new(single.monoid(), vec![2.0, 3.0]).unwrap();
        let s = scale_small_values(&single, &t, 0.1).unwrap();
        assert_abs_diff_eq!(s.dists[0].entries()[0].1, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.dists[1].entries()[0].1, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn uniform() {
        let f = uniform_targets(&TraceMonoid::path(5).unwrap()).unwrap();
        assert_abs_diff_eq!(f.weight(Letter(0)), 0.30798, epsilon = 1e-5);
        let f = uniform_targets(&TraceMonoid::ring(4).unwrap()).unwrap();
        assert_abs_diff_eq!(f.weight(Letter(2)), q1(), epsilon = 1e-12);
        let f = uniform_targets(&TraceMonoid::free(1).unwrap()).unwrap();
        assert_abs_diff_eq!(f.weight(Letter(0)), 1.0, epsilon = 1e-12);
    }
}
