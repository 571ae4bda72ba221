//! Running classifications and corpora, and rendering their results.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use mongeampere_core::charvar::{PlanarPde, Tolerances};
use mongeampere_core::ma::{classify as classify_ma, MaClassification};
use mongeampere_core::symbol::{
    is_completely_exceptional, sample_zero_locus, SymbolError, DEFAULT_SAMPLES, DEFAULT_TOL,
};
use mongeampere_core::tensor::MinorBasis;
use mongeampere_core::{Pde, SampleBox, Verdict};

use crate::corpus::{entry_seed, CorpusEntry};
use crate::report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_DISAGREEMENT: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

pub const DEFAULT_SEED: u64 = 42;
/// Base points of the minor-basis fit.
pub const MA_BASE_POINTS: usize = 4;

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub seed: u64,
    pub samples: usize,
    pub sample_box: SampleBox,
    pub tol: f64,
    pub timing: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            sample_box: SampleBox::default(),
            tol: DEFAULT_TOL,
            timing: false,
        }
    }
}

/// Classifies one equation. Fails only if the expression does not parse.
pub fn classify(text: &str, n: usize, opts: &ClassifyOptions) -> Result<ClassificationReport, SymbolError> {
    let start = Instant::now();
    let pde = Pde::parse(text, n)?;
    let bx = opts.sample_box;

    let exc = is_completely_exceptional(&pde, bx, opts.samples, opts.seed, opts.tol);
    let exceptionality = match &exc {
        Ok(v) => ExceptionalityDto::from_verdict(v),
        Err(e) => ExceptionalityDto::failed(opts.samples, e.to_string()),
    };

    let ma = classify_ma(&pde, bx, MA_BASE_POINTS, opts.seed, opts.tol);
    let monge_ampere = match (&ma, MinorBasis::new(n)) {
        (Ok(c), Ok(basis)) => MongeAmpereDto::from_classification(c, &basis),
        (Err(e), _) => MongeAmpereDto::failed(e.to_string()),
        (_, Err(e)) => MongeAmpereDto::failed(e.to_string()),
    };

    let characteristics = (n == 2).then(|| characteristics(&pde, opts));

    let (overall, exit_code) = overall(exc.as_ref().ok().map(|v| v.verdict), ma.as_ref().ok(), &characteristics);
    Ok(ClassificationReport {
        kind: "classification",
        schema: SCHEMA_ID,
        tool_version: TOOL_VERSION,
        expression: text.to_string(),
        parsed: pde.expr().to_string(),
        n,
        seed: opts.seed,
        samples: opts.samples,
        sample_box: bx.into(),
        tol: opts.tol,
        exceptionality,
        monge_ampere,
        characteristics,
        duration_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        overall,
        exit_code,
    })
}

fn characteristics(pde: &Pde, opts: &ClassifyOptions) -> CharacteristicsDto {
    let failed = |e: String| CharacteristicsDto {
        scan: None,
        equivalence: None,
        error: Some(e),
    };
    let planar = match PlanarPde::new(pde.clone()) {
        Ok(p) => p,
        Err(e) => return failed(e.to_string()),
    };
    let tols = Tolerances {
        divisibility: opts.tol,
        ..Tolerances::default()
    };
    let locus = match sample_zero_locus(pde, opts.sample_box, opts.samples, opts.seed) {
        Ok(l) => l,
        Err(e) => return failed(e.to_string()),
    };
    let scan = match planar.hyperbolicity_scan(&locus, tols.char_type) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    match planar.equivalence_report(opts.sample_box, opts.samples, opts.seed, &tols) {
        Ok(r) => CharacteristicsDto {
            scan: Some((&scan).into()),
            equivalence: Some(EquivalenceDto::new(&r, &tols)),
            error: None,
        },
        Err(e) => CharacteristicsDto {
            scan: Some((&scan).into()),
            equivalence: None,
            error: Some(e.to_string()),
        },
    }
}

/// Cross-checks the divisibility verdict, the minor-basis classification
/// and, when available, the characteristic criteria.
fn overall(
    exc: Option<Verdict>,
    ma: Option<&MaClassification>,
    chars: &Option<CharacteristicsDto>,
) -> (&'static str, i32) {
    let (Some(verdict), Some(ma)) = (exc, ma) else {
        return (OVERALL_INCONCLUSIVE, EXIT_INCONCLUSIVE);
    };
    let chars_disagree = chars
        .as_ref()
        .and_then(|c| c.equivalence.as_ref())
        .is_some_and(|e| !e.disagreements.is_empty());
    match verdict {
        Verdict::Inconclusive => (OVERALL_INCONCLUSIVE, EXIT_INCONCLUSIVE),
        _ if chars_disagree => (OVERALL_DISAGREEMENT, EXIT_DISAGREEMENT),
        Verdict::Exceptional if ma.kind.is_monge_ampere() => (OVERALL_EXCEPTIONAL, EXIT_OK),
        Verdict::NotExceptional if !ma.kind.is_monge_ampere() => (OVERALL_NOT_EXCEPTIONAL, EXIT_OK),
        _ => (OVERALL_DISAGREEMENT, EXIT_DISAGREEMENT),
    }
}

/// Runs every entry with its own derived seed and compares against the
/// expectations. Entries run in parallel; output order follows the file.
pub fn run_corpus(entries: &[CorpusEntry], seed: u64, timing: bool) -> CorpusReport {
    let start = Instant::now();
    let results: Vec<CorpusEntryDto> = entries
        .par_iter()
        .map(|e| {
            let opts = ClassifyOptions {
                seed: entry_seed(seed, &e.name),
                timing,
                ..ClassifyOptions::default()
            };
            let report = classify(&e.expression, e.n, &opts).expect("corpus expressions are validated on load");
            compare(e, opts.seed, report)
        })
        .collect();
    let matched = results.iter().filter(|r| r.matches).count();
    let worst = results.iter().map(|r| r.report.exit_code).max().unwrap_or(EXIT_OK);
    let (overall, exit_code) = if matched < results.len() {
        ("mismatch", EXIT_MISMATCH)
    } else if worst == EXIT_DISAGREEMENT {
        ("criterion disagreement", EXIT_DISAGREEMENT)
    } else {
        ("all entries match", EXIT_OK)
    };
    CorpusReport {
        kind: "corpus",
        schema: SCHEMA_ID,
        tool_version: TOOL_VERSION,
        seed,
        total: results.len(),
        matched,
        entries: results,
        duration_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        overall,
        exit_code,
    }
}

fn compare(e: &CorpusEntry, seed: u64, report: ClassificationReport) -> CorpusEntryDto {
    let expected = ExpectationDto {
        classification: Some(e.expected_kind().as_str()),
        exceptional: Some(e.expected_exceptional),
    };
    let observed = ExpectationDto {
        classification: report.monge_ampere.classification,
        exceptional: match report.exceptionality.verdict {
            "exceptional" => Some(true),
            "not-exceptional" => Some(false),
            _ => None,
        },
    };
    let mut diff = Vec::new();
    if observed.classification != expected.classification {
        diff.push(format!(
            "{}: classification expected {}, observed {}",
            e.name,
            expected.classification.unwrap_or("none"),
            observed.classification.unwrap_or("none")
        ));
    }
    if observed.exceptional != expected.exceptional {
        diff.push(format!(
            "{}: exceptional expected {}, observed {}",
            e.name,
            e.expected_exceptional,
            observed.exceptional.map_or("none".to_string(), |b| b.to_string())
        ));
    }
    CorpusEntryDto {
        name: e.name.clone(),
        seed,
        notes: e.notes.clone(),
        expected,
        observed,
        matches: diff.is_empty(),
        diff,
        report,
    }
}

/// Error message with the input echoed and a caret under the offset, if
/// the error has one.
pub fn parse_error_message(text: &str, err: &SymbolError) -> String {
    let mut s = format!("error: {err}\n");
    if let Some(offset) = match err {
        SymbolError::Expr(e) => e.offset(),
        _ => None,
    } {
        let col = text.get(..offset).map_or(offset, |p| p.chars().count());
        let _ = write!(s, "  {text}\n  {}^\n", " ".repeat(col));
    }
    s
}

fn sci(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |v| format!("{v:.3e}"))
}

/// Human-readable summary of a classification.
pub fn render_text(r: &ClassificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "equation         {} = 0   (n = {})", r.parsed, r.n);
    let _ = writeln!(
        s,
        "sampling         seed {}, {} samples, box [{}, {}], tol {:e}",
        r.seed, r.samples, r.sample_box.lo, r.sample_box.hi, r.tol
    );
    let e = &r.exceptionality;
    let _ = write!(s, "exceptionality   {}", e.verdict);
    match &e.error {
        Some(err) => {
            let _ = writeln!(s, " ({err})");
        }
        None => {
            let _ = writeln!(
                s,
                " ({}/{} pass, {} degenerate, max residual {})",
                e.passed,
                e.sampled,
                e.degenerate,
                sci(e.max_residual)
            );
        }
    }
    let m = &r.monge_ampere;
    match (&m.classification, &m.error) {
        (Some(c), _) => {
            let accepted = m.base_points.iter().filter(|b| b.accepted).count();
            let _ = writeln!(
                s,
                "minor fit        {c} ({accepted}/{} base points fit, higher-order size {})",
                m.base_points.len(),
                sci(m.max_higher_order)
            );
        }
        (None, err) => {
            let _ = writeln!(s, "minor fit        error ({})", err.as_deref().unwrap_or("unknown"));
        }
    }
    if let Some(c) = &r.characteristics {
        if let Some(scan) = &c.scan {
            let _ = writeln!(
                s,
                "types            {} hyperbolic, {} parabolic, {} elliptic, {} degenerate",
                scan.hyperbolic, scan.parabolic, scan.elliptic, scan.totally_degenerate
            );
        }
        if let Some(eq) = &c.equivalence {
            let _ = writeln!(
                s,
                "criteria         {} compared: {} all pass, {} all fail, {} disagree",
                eq.compared,
                eq.all_pass,
                eq.all_fail,
                eq.disagreements.len()
            );
        }
        if let Some(err) = &c.error {
            let _ = writeln!(s, "characteristics  error ({err})");
        }
    }
    if let Some(ms) = r.duration_ms {
        let _ = writeln!(s, "duration         {ms:.1} ms");
    }
    let _ = writeln!(s, "overall          {}", r.overall);
    s
}

pub fn render_corpus_text(r: &CorpusReport) -> String {
    let mut s = String::new();
    for e in &r.entries {
        let mark = if e.matches { "ok      " } else { "MISMATCH" };
        let _ = writeln!(s, "{mark} {:<28} {}", e.name, e.report.overall);
        for d in &e.diff {
            let _ = writeln!(s, "         {d}");
        }
    }
    let _ = writeln!(s, "{}/{} entries match: {}", r.matched, r.total, r.overall);
    s
}
