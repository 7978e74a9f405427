//! One function per subcommand. Each returns a report whose status decides
//! the exit code.

use std::fmt::Write as _;

use itertools::Itertools;
use oscidecay_core::nondegeneracy::{
    annihilator_witness, default_pool, degeneracy_decompose, factor_set, general_position as gp_of,
    DegeneracyVerdict, DiffOperator, GeneralPosition, Witness,
};
use oscidecay_core::poly::{parse_polynomial, MultiPoly};
use oscidecay_core::quadrature::{decay_exponent, geometric_grid, DecayFit, OscillatoryIntegral, QuadConfig};
use oscidecay_core::scalar::QuadScalar;
use oscidecay_core::strategy::{
    analyze_freezing, enumerate_strategies, find_hyp_witness, norms_string, validate_certificate,
    DecayCertificate, HypWitness, Rejection, Route, Validation,
};
use oscidecay_core::uniformity::{
    difference_phase, difference_phase_check, hyp_check as core_hyp_check, wave_operator, UniformityStatus,
    UniformityVerdict, SHIFT_PARAM,
};
use num_traits::Zero;
use serde::Serialize;

use crate::problem::Problem;
use crate::report::{DecayRow, Report, Status};
use crate::CliError;

/// `estimate-decay` exits 0 when the fitted exponent reaches this.
pub const DECAY_THRESHOLD: f64 = 0.05;

fn header(command: &str, p: &Problem) -> String {
    format!(
        "{command}: {} | P = {} | degree bound {} | {} projections in R^{}\n",
        p.name,
        p.phase,
        p.degree_bound,
        p.sys.len(),
        p.sys.dim()
    )
}

fn render_verdict(v: &UniformityVerdict) -> String {
    let mut s = match &v.status {
        UniformityStatus::Positive => "positive".to_string(),
        UniformityStatus::IdenticallyZero => "identically zero".to_string(),
        UniformityStatus::UndecidedMultiparameter => "undecided (several parameters)".to_string(),
        UniformityStatus::VanishesAt {
            parameter,
            root_count,
            exact_root,
            enclosure,
        } => {
            let at = match exact_root {
                Some(r) => format!("{parameter} = {r}"),
                None => format!("{parameter} in ({}, {}]", enclosure.0, enclosure.1),
            };
            format!("vanishes: {root_count} common root(s) on {}, first at {at}", v.domain)
        }
    };
    if !v.evidence.is_empty() {
        write!(s, "; family [{}]", v.evidence.iter().join(", ")).unwrap();
    }
    if let Some(g) = &v.gcd {
        write!(s, "; gcd {g}").unwrap();
    }
    s
}

fn render_decomposition(out: &mut String, p: &Problem, sys_labels: &[usize], parts: &[MultiPoly]) {
    for (k, part) in parts.iter().enumerate() {
        if !part.is_zero() {
            let j = sys_labels[k];
            writeln!(out, "  f{}: {part}   with t = {}", j + 1, p.sys.form_string(j)).unwrap();
        }
    }
}

#[derive(Serialize)]
struct DegenerateResult<'a> {
    verdict: &'a DegeneracyVerdict,
    reconstruction_exact: Option<bool>,
}

pub fn check_degenerate(p: &Problem) -> Result<Report, CliError> {
    let verdict = degeneracy_decompose(&p.phase, &p.sys, p.degree_bound)?;
    let mut h = header("check-degenerate", p);
    let mut exact = None;
    match &verdict {
        DegeneracyVerdict::Decomposition { parts } => {
            let ok = verdict.reconstruct(&p.sys).is_some_and(|r| r == p.phase);
            exact = Some(ok);
            h.push_str("degenerate: P = sum of p_j(t)\n");
            let labels: Vec<usize> = (0..p.sys.len()).collect();
            render_decomposition(&mut h, p, &labels, parts);
            writeln!(h, "reconstruction: {}", if ok { "exact" } else { "MISMATCH" }).unwrap();
        }
        DegeneracyVerdict::Nondegenerate { distance_sq } => {
            writeln!(h, "nondegenerate: squared distance to the degenerate span = {distance_sq}").unwrap();
        }
    }
    let status = Status::from_bool(!verdict.is_degenerate());
    let result = DegenerateResult {
        verdict: &verdict,
        reconstruction_exact: exact,
    };
    Ok(Report::new("check-degenerate", status, &p.summary(), &result, h))
}

#[derive(Serialize)]
struct GeneralPositionResult<'a> {
    general_position: &'a GeneralPosition,
    n: usize,
    m: usize,
    count_ok: bool,
}

pub fn general_position_report(p: &Problem, gp: &GeneralPosition) -> Report {
    let mut h = header("general-position", p);
    match gp {
        GeneralPosition::Holds => h.push_str("general position: holds\n"),
        GeneralPosition::Fails { subset } => {
            writeln!(h, "general position: fails, {} dependent", factor_set(subset)).unwrap()
        }
    }
    let (n, m) = (p.sys.len(), p.sys.dim());
    let count_ok = n < 2 * m;
    writeln!(h, "count: {n} {} {}", if count_ok { "<" } else { "≮" }, 2 * m).unwrap();
    let result = GeneralPositionResult {
        general_position: gp,
        n,
        m,
        count_ok,
    };
    Report::new("general-position", Status::from_bool(gp.holds()), &p.summary(), &result, h)
}

pub fn general_position(p: &Problem) -> Result<Report, CliError> {
    Ok(general_position_report(p, &gp_of(&p.sys)))
}

/// Parses `x; y; x - y` into an operator over the problem's variables.
pub fn parse_operator(p: &Problem, text: &str) -> Result<DiffOperator, CliError> {
    let vars = p.sys.vars();
    let mut dirs = Vec::new();
    for (k, piece) in text.split(';').enumerate() {
        let field = format!("operator direction {}", k + 1);
        let form = parse_polynomial(piece.trim(), vars).map_err(|source| CliError::Parse {
            field: field.clone(),
            source,
        })?;
        let linear = form.total_degree().is_none_or(|d| d <= 1) && form.coeff(&vec![0; vars.len()]).is_zero();
        if !linear {
            return Err(CliError::Invalid(format!(
                "{field}: {} is not a linear form",
                piece.trim()
            )));
        }
        let u: Vec<QuadScalar> = (0..vars.len())
            .map(|i| {
                let mut e = vec![0; vars.len()];
                e[i] = 1;
                form.coeff(&e)
            })
            .collect();
        dirs.push(u);
    }
    Ok(DiffOperator::new(vars.clone(), dirs)?)
}

#[derive(Serialize)]
struct HypResult<'a> {
    frozen: &'a [String],
    operator: &'a DiffOperator,
    /// `true` when the operator came from the default pool search.
    searched: bool,
    verdict: &'a UniformityVerdict,
}

pub fn hyp_check(p: &Problem, frozen: &[String], operator: Option<&str>) -> Result<Report, CliError> {
    let frozen = p.coordinates(frozen)?;
    let (op, verdict, searched) = match operator {
        Some(text) => {
            let op = parse_operator(p, text)?;
            let v = core_hyp_check(&p.phase, &frozen, &op)?;
            (op, v, false)
        }
        None => {
            let fun = p.functional()?;
            let analysis = analyze_freezing(&fun, &frozen)?;
            let reduced = analysis.reduced_system().map_err(|_| {
                CliError::Invalid("no factor depends on the free coordinates".to_string())
            })?;
            match find_hyp_witness(&fun, &frozen, &reduced)? {
                Some(HypWitness { operator, verdict }) => (operator, verdict, true),
                None => {
                    let first = default_pool(&reduced)
                        .into_iter()
                        .next()
                        .ok_or_else(|| CliError::Invalid("empty witness pool".to_string()))?
                        .embed(p.sys.vars())?;
                    let v = core_hyp_check(&p.phase, &frozen, &first)?;
                    (first, v, true)
                }
            }
        }
    };
    let mut h = header("hyp-check", p);
    writeln!(
        h,
        "frozen {{{}}}, operator D = {op}{}",
        frozen.join(", "),
        if searched { " (default pool)" } else { "" }
    )
    .unwrap();
    writeln!(h, "inf over frozen of sup |D P|: {}", render_verdict(&verdict)).unwrap();
    let status = Status::from_bool(verdict.is_positive());
    let result = HypResult {
        frozen: &frozen,
        operator: &op,
        searched,
        verdict: &verdict,
    };
    Ok(Report::new("hyp-check", status, &p.summary(), &result, h))
}

#[derive(Serialize)]
struct DiffPhaseResult<'a> {
    pivot: usize,
    direction: &'a str,
    pivot_valid: bool,
    difference_phase: &'a MultiPoly,
    verdict: &'a UniformityVerdict,
    wave: Option<&'a MultiPoly>,
    witness: Option<&'a Witness>,
    /// Decomposition of the difference phase at one bad shift.
    specialization: Option<Specialization>,
}

#[derive(Serialize)]
struct Specialization {
    zeta: QuadScalar,
    phase: MultiPoly,
    verdict: DegeneracyVerdict,
}

pub fn diff_phase_check(p: &Problem, pivot: usize, direction: Option<&str>) -> Result<Report, CliError> {
    let n = p.sys.len();
    if pivot == 0 || pivot > n {
        return Err(CliError::Invalid(format!("--pivot {pivot} out of range 1..={n}")));
    }
    let j = pivot - 1;
    let vars = p.sys.vars();
    let dir = match direction {
        Some(d) => {
            p.coordinates(&[d.to_string()])?;
            d.to_string()
        }
        None => {
            let i = (0..vars.len())
                .find(|&i| p.sys.vector(j)[i].is_zero())
                .ok_or_else(|| CliError::Invalid(format!("f{pivot} depends on every coordinate; pass --direction")))?;
            vars.name(i).to_string()
        }
    };
    let dir_idx = vars.index_of(&dir).expect("checked");
    let pivot_valid = p.sys.vector(j)[dir_idx].is_zero();
    let remaining = p.sys.without(j)?;
    let verdict = difference_phase_check(&p.phase, &dir, &remaining, p.degree_bound)?;
    let shifted = difference_phase(&p.phase, &dir, vars)?;
    let wave = if remaining.on_light_cone() {
        Some(wave_operator(&shifted, vars)?)
    } else {
        None
    };
    let witness = annihilator_witness(&shifted, &remaining, &default_pool(&remaining))?;
    let bad_zeta = match &verdict.status {
        UniformityStatus::IdenticallyZero => Some(QuadScalar::from_int(1)),
        UniformityStatus::VanishesAt { exact_root, .. } => exact_root.clone(),
        _ => None,
    };
    let specialization = match bad_zeta {
        None => None,
        Some(zeta) => {
            let k = shifted.vars().index_of(SHIFT_PARAM).expect("shift parameter present");
            let phase = shifted.evaluate_var(k, &zeta).embed(vars)?;
            let verdict = degeneracy_decompose(&phase, &remaining, p.degree_bound)?;
            Some(Specialization { zeta, phase, verdict })
        }
    };

    let mut h = header("diff-phase-check", p);
    writeln!(
        h,
        "pivot f{pivot}, shift in {dir}{}",
        if pivot_valid { "" } else { " (pivot depends on the shift coordinate: Cauchy-Schwarz peel invalid)" }
    )
    .unwrap();
    writeln!(h, "difference phase: {shifted}").unwrap();
    writeln!(h, "uniform nondegeneracy for |{SHIFT_PARAM}| >= 1: {}", render_verdict(&verdict)).unwrap();
    if let Some(w) = &wave {
        writeln!(h, "wave operator (∂x² + ∂y² - ∂z²) of the difference: {w}").unwrap();
    }
    if let Some(w) = &witness {
        writeln!(h, "witness {}: D applied = {}", w.operator, w.value).unwrap();
    }
    if let Some(s) = &specialization {
        writeln!(h, "at {SHIFT_PARAM} = {}: {}", s.zeta, s.phase).unwrap();
        if let DegeneracyVerdict::Decomposition { parts } = &s.verdict {
            let labels: Vec<usize> = (0..n).filter(|&k| k != j).collect();
            render_decomposition(&mut h, p, &labels, parts);
        }
    }
    let result = DiffPhaseResult {
        pivot,
        direction: &dir,
        pivot_valid,
        difference_phase: &shifted,
        verdict: &verdict,
        wave: wave.as_ref(),
        witness: witness.as_ref(),
        specialization,
    };
    Ok(Report::new(
        "diff-phase-check",
        Status::from_bool(verdict.is_positive()),
        &p.summary(),
        &result,
        h,
    ))
}

fn describe(c: &DecayCertificate, out: &mut String) {
    let mut line = |s: String| writeln!(out, "       {s}").unwrap();
    match &c.route {
        Route::DirectL2(check) => {
            line(format!("n = {} < 2m = {}, general position, phase nondegenerate", check.n, 2 * check.m));
        }
        Route::Grouped(a) => {
            line(format!("groups {}", a.groups_string()));
            if !a.passthrough.is_empty() {
                line(format!("no free part: {}", factor_set(&a.passthrough)));
            }
            line(format!("count {} < {}, general position holds", a.count.n, 2 * a.count.m));
            if let Some(u) = &a.uniformity {
                line(format!("residual over frozen: {}", render_verdict(u)));
            }
            if let Some(w) = &a.hyp_witness {
                line(format!("hyp witness {}: {}", w.operator, render_verdict(&w.verdict)));
            }
        }
        Route::CauchySchwarz(e) => {
            line(format!(
                "pivot f{}, shift in {}, partner f{}, {}",
                e.pivot + 1,
                e.direction,
                e.partner + 1,
                e.split
            ));
            line(format!("difference phase {}", e.difference_phase));
            line(format!("for |{SHIFT_PARAM}| >= 1: {}", render_verdict(&e.verdict)));
            if let Some(w) = &e.wave {
                line(format!("wave operator of the difference: {w}"));
            }
            if let Some(w) = &e.witness {
                line(format!("witness {}: {}", w.operator, w.value));
            }
        }
        Route::AnnihilatorLinf(e) => {
            line(format!("witness {}: D P = {}", e.witness.operator, e.witness.value));
            line(e.conditional.clone());
        }
    }
}

#[derive(Serialize)]
struct RankedCertificate<'a> {
    rank: usize,
    norms: String,
    validation: Validation,
    certificate: &'a DecayCertificate,
}

#[derive(Serialize)]
struct StrategyResult<'a> {
    max_freeze: usize,
    certificates: Vec<RankedCertificate<'a>>,
    rejections: &'a [Rejection],
}

pub fn strategy(p: &Problem, max_freeze: Option<usize>) -> Result<Report, CliError> {
    let fun = p.functional()?;
    let max_freeze = max_freeze.unwrap_or(p.sys.dim() - 2);
    let outcome = enumerate_strategies(&fun, max_freeze)?;
    let mut h = header("strategy", p);
    writeln!(h, "freezings up to {max_freeze} coordinate(s)").unwrap();
    let mut ranked = Vec::new();
    if outcome.certificates.is_empty() {
        h.push_str("no certificate found (this does not show that decay fails)\n");
    }
    for (k, c) in outcome.certificates.iter().enumerate() {
        let validation = validate_certificate(c, &fun);
        let mark = match &validation {
            Validation::Pass => "validated".to_string(),
            Validation::Fail(r) => format!("VALIDATION FAILED: {r}"),
        };
        writeln!(h, "  {:>2}. {}  norms {}  [{mark}]", k + 1, c.key, norms_string(&c.norms)).unwrap();
        describe(c, &mut h);
        ranked.push(RankedCertificate {
            rank: k + 1,
            norms: norms_string(&c.norms),
            validation,
            certificate: c,
        });
    }
    if !outcome.rejections.is_empty() {
        h.push_str("rejected:\n");
        for r in &outcome.rejections {
            writeln!(h, "  {}: {}", r.key, r.reason).unwrap();
        }
    }
    let status = Status::from_bool(!outcome.certificates.is_empty());
    let result = StrategyResult {
        max_freeze,
        certificates: ranked,
        rejections: &outcome.rejections,
    };
    Ok(Report::new("strategy", status, &p.summary(), &result, h))
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayOptions {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_steps: usize,
    pub rel_tol: f64,
}

#[derive(Serialize)]
struct DecayResult<'a> {
    options: &'a DecayOptions,
    threshold: f64,
    fit: &'a DecayFit,
}

pub fn estimate_decay(p: &Problem, opts: &DecayOptions) -> Result<(Report, Vec<DecayRow>), CliError> {
    let factors = p.numeric_factors.clone().ok_or_else(|| {
        CliError::Invalid("estimate-decay needs one [[numeric_factors]] entry per factor".to_string())
    })?;
    if !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0) {
        return Err(CliError::Invalid(format!("--rel-tol {} must lie in (0, 1)", opts.rel_tol)));
    }
    let projections = p
        .sys
        .vectors()
        .iter()
        .map(|v| v.iter().map(QuadScalar::to_f64).collect())
        .collect();
    let integral = OscillatoryIntegral::new(p.phase.clone(), projections, factors, p.cutoff.clone())?;
    let grid = geometric_grid(opts.lambda_min, opts.lambda_max, opts.lambda_steps)?;
    let cfg = QuadConfig {
        rel_tol: opts.rel_tol,
        ..QuadConfig::default()
    };
    let fit = decay_exponent(&integral, &grid, &cfg)?;

    let rows: Vec<DecayRow> = fit
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| DecayRow {
            lambda: s.lambda,
            re: s.re,
            im: s.im,
            abs: s.abs,
            envelope: (k >= 1 && k + 1 < fit.samples.len()).then(|| fit.envelope[k - 1]),
        })
        .collect();
    let mut h = header("estimate-decay", p);
    h.push_str("      lambda          |I|\n");
    for s in &fit.samples {
        writeln!(h, "  {:>10.3}  {:>11.5e}", s.lambda, s.abs).unwrap();
    }
    writeln!(
        h,
        "epsilon = {:.4} (slope {:.4}, R^2 {:.4}); numerical estimate, not a proof",
        fit.epsilon, fit.slope, fit.r_squared
    )
    .unwrap();
    let status = Status::from_bool(fit.epsilon >= DECAY_THRESHOLD);
    let result = DecayResult {
        options: opts,
        threshold: DECAY_THRESHOLD,
        fit: &fit,
    };
    Ok((Report::new("estimate-decay", status, &p.summary(), &result, h), rows))
}
