//! Builtin statistical scenarios.

use std::time::Instant;

use heapsync::moebius::{extend_valuation, smallest_root, Valuation};
use heapsync::pfsa::NaiveWalk;
use heapsync::sampler::{
    classify_psa, psa_valuation, structural_class, DistKind, Psa, PsaClass, PsaOptions, PsaStatus,
    RandomStream,
};
use heapsync::stats::{
    estimate_cylinder, fit_first_hitting, letter_frequencies, mean_report, proportion_report,
    sample_lengths, DEFAULT_SLACK,
};
use heapsync::text::{parse_config, RunConfig};
use heapsync::trace::Letter;

use crate::commands::{dists_of, pfsa_config, valuation_line};
use crate::{CmdResult, Failure, Options};

pub const SCENARIOS: [(&str, &str); 6] = [
    ("ring4-mean-length", "mean output length 6 and P(empty) = 1/8 for the synchronization sampler"),
    ("naive-not-bernoulli", "concatenated finite outputs miss the uniform cylinder weight p0"),
    ("pfsa-fit", "first hitting times of the full walk follow the valuation, a perturbed one is rejected"),
    ("pfsa-cylinders", "cylinder weights and letter frequencies of the full walk"),
    ("dichotomy", "finite/infinite classification agrees with observed runs"),
    ("acceptance", "all scenarios on the builtin configurations"),
];

const RING4_PSA: &str = include_str!("../../../configs/ring4-psa.conf");
const RING4_PFSA: &str = include_str!("../../../configs/ring4-pfsa.conf");
const PATH5_PSA: &str = include_str!("../../../configs/path5-psa.conf");

/// Tolerance in standard errors for estimates compared with exact values.
const Z_TOL: f64 = 4.0;

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

fn builtin(text: &str) -> RunConfig {
    parse_config(text).expect("builtin configuration parses")
}

fn ring4_mean_length(cfg: &RunConfig, opts: &Options) -> Result<Vec<Check>, Failure> {
    let psa = Psa::new(&cfg.network, dists_of(cfg)?)?;
    let n = opts.samples.unwrap_or(200_000);
    let lengths = sample_lengths(&psa, n, &RandomStream::new(opts.seed))?;
    let mean = mean_report(&lengths);
    let empty = proportion_report(lengths.iter().filter(|&&l| l == 0.0).count() as u64, n);
    Ok(vec![
        check("mean length is 6", mean.contains(6.0), mean.to_string()),
        check("P(empty) is 1/8", empty.contains(0.125), empty.to_string()),
    ])
}

fn naive_not_bernoulli(cfg: &RunConfig, opts: &Options) -> Result<Vec<Check>, Failure> {
    let m = cfg.network.monoid();
    let walk = NaiveWalk::new(&cfg.network, dists_of(cfg)?)?;
    let a = match &cfg.run.letter {
        Some(name) => m.letter_or_err(name)?,
        None => Letter(0),
    };
    let x = m.normalize(&[a])?;
    let p0 = smallest_root(m)?;
    let n = opts.samples.unwrap_or(400_000);
    let r = estimate_cylinder(&walk, &x, n, &RandomStream::new(opts.seed), DEFAULT_SLACK)?;
    let z = r.z_score(p0);
    Ok(vec![check(
        format!("cylinder of {} differs from p0", m.name(a)),
        z.abs() > 5.0,
        format!("{r} p0={p0:.6} z={z:.2}"),
    )])
}

/// Valuation realized by a full-walk configuration.
fn walk_valuation(cfg: &RunConfig, opts: &Options) -> Result<(heapsync::pfsa::PfsaConfig, Valuation), Failure> {
    let pc = pfsa_config(cfg, opts.seed)?;
    let fr = psa_valuation(pc.reduced(), pc.dists())?;
    let f = extend_valuation(pc.monoid(), pc.letter(), fr.weights())?;
    Ok((pc, f))
}

fn pfsa_fit(cfg: &RunConfig, opts: &Options) -> Result<Vec<Check>, Failure> {
    let (pc, f) = walk_valuation(cfg, opts)?;
    let m = pc.monoid();
    let sampler = pc.sampler()?;
    let master = RandomStream::new(opts.seed);
    let n = opts.samples.unwrap_or(100_000);
    let increments = (0..n)
        .map(|k| sampler.sample_pyramidal(&master.derive(k)).map(|i| i.trace))
        .collect::<Result<Vec<_>, _>>()?;
    let fit = fit_first_hitting(m, &increments, &f, pc.letter(), 8)?;
    let perturbed = Valuation::new(m, f.weights().iter().map(|w| 0.9 * w).collect())?;
    let control = fit_first_hitting(m, &increments, &perturbed, pc.letter(), 8)?;
    Ok(vec![
        check(
            "increments follow the valuation",
            fit.p_value > 0.01,
            format!("{} valuation: {}", fit.key_values(), valuation_line(m, &f)),
        ),
        check("perturbed valuation is rejected", control.p_value < 1e-6, control.key_values()),
    ])
}

fn pfsa_cylinders(cfg: &RunConfig, opts: &Options) -> Result<Vec<Check>, Failure> {
    let (pc, f) = walk_valuation(cfg, opts)?;
    let m = pc.monoid();
    let sampler = pc.sampler()?;
    let n = opts.samples.unwrap_or(50_000);
    let mut checks = Vec::new();
    for a in m.letters() {
        let x = m.normalize(&[a])?;
        let master = RandomStream::new(opts.seed).derive(a.0 as u64);
        let r = estimate_cylinder(&sampler, &x, n, &master, DEFAULT_SLACK)?;
        let z = r.z_score(f.weight(a));
        checks.push(check(
            format!("cylinder of {}", m.name(a)),
            z.abs() < Z_TOL,
            format!("{r} f={:.6} z={z:.2}", f.weight(a)),
        ));
    }
    let w = f.weights();
    if w.iter().all(|&x| (x - w[0]).abs() < 1e-9) {
        let walk = sampler.walk(&RandomStream::new(opts.seed), 200_000, false)?;
        let freqs = letter_frequencies(&walk.trace, m.len());
        let target = 1.0 / m.len() as f64;
        let worst = freqs.iter().map(|x| (x - target).abs()).fold(0.0, f64::max);
        let shown: Vec<String> = freqs.iter().map(|x| format!("{x:.4}")).collect();
        checks.push(check(
            "letter frequencies are equal",
            worst < 0.01,
            format!("frequencies {} over {} pieces", shown.join(" "), walk.trace.len()),
        ));
    }
    Ok(checks)
}

fn dichotomy(cfg: &RunConfig, opts: &Options) -> Result<Vec<Check>, Failure> {
    let net = &cfg.network;
    let dists = dists_of(cfg)?;
    let class = classify_psa(net, dists)?;
    let mut checks = Vec::new();
    if dists.iter().all(|d| d.kind() == DistKind::Probability) {
        let s = structural_class(net);
        checks.push(check("structure agrees with valuation", s == class, format!("valuation {class}, structure {s}")));
    }
    let psa = Psa::new(net, dists)?;
    let master = RandomStream::new(opts.seed);
    match class {
        PsaClass::Finite => {
            let n = opts.samples.unwrap_or(10_000);
            let po = PsaOptions {
                budget: opts.budget.unwrap_or(heapsync::sampler::DEFAULT_BUDGET),
                ..PsaOptions::default()
            };
            let mut stuck = 0;
            for k in 0..n {
                if psa.run(&master.derive(k), &po)?.status == PsaStatus::BudgetExhausted {
                    stuck += 1;
                }
            }
            checks.push(check("finite: every run terminates", stuck == 0, format!("{stuck} of {n} runs hit the budget")));
        }
        PsaClass::Infinite => {
            let n = opts.samples.unwrap_or(100);
            let budget = opts.budget.unwrap_or(10_000);
            let po = PsaOptions {
                budget,
                ..PsaOptions::default()
            };
            let mut short = 0;
            for k in 0..n {
                let r = psa.run(&master.derive(k), &po)?;
                if r.status != PsaStatus::BudgetExhausted || r.trace.len() < budget {
                    short += 1;
                }
            }
            checks.push(check(
                "infinite: every run reaches the budget",
                short == 0,
                format!("{short} of {n} runs stopped before {budget} pieces"),
            ));
        }
    }
    Ok(checks)
}

fn run_scenario(name: &str, cfg: Option<&RunConfig>, opts: &Options) -> Result<Vec<Check>, Failure> {
    let pick = |text: &str| cfg.cloned().unwrap_or_else(|| builtin(text));
    match name {
        "ring4-mean-length" => ring4_mean_length(&pick(RING4_PSA), opts),
        "naive-not-bernoulli" => naive_not_bernoulli(&pick(RING4_PSA), opts),
        "pfsa-fit" => pfsa_fit(&pick(RING4_PFSA), opts),
        "pfsa-cylinders" => pfsa_cylinders(&pick(RING4_PFSA), opts),
        "dichotomy" => dichotomy(&pick(RING4_PSA), opts),
        "acceptance" => {
            let mut all = Vec::new();
            for (scenario, text) in [
                ("ring4-mean-length", RING4_PSA),
                ("naive-not-bernoulli", RING4_PSA),
                ("pfsa-fit", RING4_PFSA),
                ("pfsa-cylinders", RING4_PFSA),
                ("dichotomy", RING4_PSA),
                ("dichotomy", PATH5_PSA),
            ] {
                let cfg = builtin(text);
                for mut c in run_scenario(scenario, Some(&cfg), opts)? {
                    c.name = format!("{scenario}: {}", c.name);
                    all.push(c);
                }
            }
            Ok(all)
        }
        other => Err(Failure::Usage(format!("unknown scenario {other:?} (see verify --list)"))),
    }
}

pub fn verify(cfg: Option<RunConfig>, opts: &Options) -> CmdResult {
    let name = opts
        .scenario
        .as_deref()
        .ok_or_else(|| Failure::Usage("--scenario is required (see verify --list)".into()))?;
    let started = Instant::now();
    let checks = run_scenario(name, cfg.as_ref(), opts)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in &checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let detail = c.detail.split_whitespace().collect::<Vec<_>>().join(" ");
        out.push_str(&format!("{verdict}  {:<width$}  {detail}\n", c.name));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    out.push_str(&format!(
        "scenario={name} checks={} failed={failed} seed={} wall_ms={:.0}\n",
        checks.len(),
        opts.seed,
        started.elapsed().as_secs_f64() * 1e3
    ));
    crate::emit(&opts.out, &out)?;
    if failed > 0 {
        return Err(Failure::Fail(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}
