//! Serializable report types. Field order is fixed by declaration order.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use mongeampere_core::charvar::{EquivalenceReport, EquivalenceSample, HyperbolicityScan, Tolerances};
use mongeampere_core::ma::MaClassification;
use mongeampere_core::symbol::PointCheck;
use mongeampere_core::tensor::{Form, MinorBasis};
use mongeampere_core::{CharType, ExceptionalityVerdict, JetPoint, SampleBox};

pub const SCHEMA_ID: &str = "mongeampere/report/v1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const OVERALL_EXCEPTIONAL: &str = "completely exceptional (Monge–Ampère)";
pub const OVERALL_NOT_EXCEPTIONAL: &str = "not exceptional";
pub const OVERALL_INCONCLUSIVE: &str = "inconclusive";
pub const OVERALL_DISAGREEMENT: &str = "criterion disagreement";

#[derive(Serialize, Clone, Debug)]
pub struct ClassificationReport {
    pub kind: &'static str,
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub expression: String,
    /// The parsed expression printed back.
    pub parsed: String,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    #[serde(rename = "box")]
    pub sample_box: BoxDto,
    pub tol: f64,
    pub exceptionality: ExceptionalityDto,
    pub monge_ampere: MongeAmpereDto,
    /// Present for `n = 2` only.
    pub characteristics: Option<CharacteristicsDto>,
    /// Wall-clock time, recorded only on request.
    pub duration_ms: Option<f64>,
    pub overall: &'static str,
    pub exit_code: i32,
}

#[derive(Serialize, Clone, Copy, Debug)]
pub struct BoxDto {
    pub lo: f64,
    pub hi: f64,
}

impl From<SampleBox> for BoxDto {
    fn from(b: SampleBox) -> Self {
        Self { lo: b.lo, hi: b.hi }
    }
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct PointDto {
    pub x: Vec<f64>,
    pub u: f64,
    pub p: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

impl From<&JetPoint> for PointDto {
    fn from(pt: &JetPoint) -> Self {
        let h = pt.hessian();
        let n = h.dim();
        Self {
            x: pt.x().to_vec(),
            u: pt.u(),
            p: pt.p().to_vec(),
            hessian: (0..n).map(|i| (0..n).map(|j| h.get(i, j)).collect()).collect(),
        }
    }
}

/// A form as `{n, degree, coefficients}` with coefficients keyed by
/// exponent vectors such as `"2,0"`, in the form's monomial order.
#[derive(Clone, Debug)]
pub struct FormDto {
    pub n: usize,
    pub degree: usize,
    pub terms: Vec<(String, f64)>,
}

impl<const D: usize> From<&Form<D>> for FormDto {
    fn from(f: &Form<D>) -> Self {
        let terms = f
            .terms()
            .map(|(e, c)| {
                let key: Vec<String> = e.iter().map(u8::to_string).collect();
                (key.join(","), c)
            })
            .collect();
        Self {
            n: f.dim(),
            degree: f.degree(),
            terms,
        }
    }
}

struct Terms<'a>(&'a [(String, f64)]);

impl Serialize for Terms<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for FormDto {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("n", &self.n)?;
        map.serialize_entry("degree", &self.degree)?;
        map.serialize_entry("coefficients", &Terms(&self.terms))?;
        map.end()
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct PointCheckDto {
    pub point: PointDto,
    pub pass: bool,
    pub residual: f64,
    pub degenerate: bool,
    pub symbol: FormDto,
    pub second_symbol: FormDto,
    pub factor: Option<FormDto>,
}

impl From<&PointCheck> for PointCheckDto {
    fn from(c: &PointCheck) -> Self {
        Self {
            point: (&c.point).into(),
            pass: c.pass,
            residual: c.residual,
            degenerate: c.degenerate,
            symbol: (&c.symbol).into(),
            second_symbol: (&c.second_symbol).into(),
            factor: c.factor.as_ref().map(Into::into),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct ExceptionalityDto {
    /// `exceptional`, `not-exceptional`, `inconclusive` or `error`.
    pub verdict: &'static str,
    pub requested: usize,
    pub sampled: usize,
    pub passed: usize,
    pub degenerate: usize,
    pub max_residual: Option<f64>,
    /// The sample with the largest residual.
    pub worst_sample: Option<PointCheckDto>,
    pub error: Option<String>,
}

impl ExceptionalityDto {
    pub fn from_verdict(v: &ExceptionalityVerdict) -> Self {
        let worst = v
            .samples
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .map(Into::into);
        Self {
            verdict: v.verdict.as_str(),
            requested: v.requested,
            sampled: v.samples.len(),
            passed: v.passed(),
            degenerate: v.degenerate(),
            max_residual: Some(v.max_residual()),
            worst_sample: worst,
            error: None,
        }
    }

    pub fn failed(requested: usize, error: String) -> Self {
        Self {
            verdict: "error",
            requested,
            sampled: 0,
            passed: 0,
            degenerate: 0,
            max_residual: None,
            worst_sample: None,
            error: Some(error),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct MinorCoefficientDto {
    /// 1-based row indices of the minor; empty for the constant term.
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub value: f64,
}

#[derive(Serialize, Clone, Debug)]
pub struct BasePointDto {
    pub point: PointDto,
    pub accepted: bool,
    pub fit_residual: f64,
    pub validation_residual: f64,
    pub threshold: f64,
    pub coefficients: Vec<MinorCoefficientDto>,
}

#[derive(Serialize, Clone, Debug)]
pub struct MongeAmpereDto {
    /// `linear`, `quasi-linear`, `monge-ampere` or `non-monge-ampere`.
    pub classification: Option<&'static str>,
    pub max_higher_order: Option<f64>,
    pub base_points: Vec<BasePointDto>,
    pub error: Option<String>,
}

impl MongeAmpereDto {
    pub fn from_classification(c: &MaClassification, basis: &MinorBasis) -> Self {
        let base_points = c
            .fits
            .iter()
            .map(|f| BasePointDto {
                point: (&f.base).into(),
                accepted: f.accepted(),
                fit_residual: f.fit_residual,
                validation_residual: f.validation_residual,
                threshold: f.threshold,
                coefficients: basis
                    .minors()
                    .iter()
                    .zip(&f.coefficients)
                    .map(|(m, &value)| MinorCoefficientDto {
                        rows: m.rows.iter().map(|i| i + 1).collect(),
                        cols: m.cols.iter().map(|i| i + 1).collect(),
                        value,
                    })
                    .collect(),
            })
            .collect();
        Self {
            classification: Some(c.kind.as_str()),
            max_higher_order: Some(c.max_higher_order),
            base_points,
            error: None,
        }
    }

    pub fn failed(error: String) -> Self {
        Self {
            classification: None,
            max_higher_order: None,
            base_points: Vec::new(),
            error: Some(error),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct ScanDto {
    pub hyperbolic: usize,
    pub parabolic: usize,
    pub elliptic: usize,
    pub totally_degenerate: usize,
    pub hyperbolic_fraction: f64,
}

impl From<&HyperbolicityScan> for ScanDto {
    fn from(s: &HyperbolicityScan) -> Self {
        Self {
            hyperbolic: s.count(CharType::Hyperbolic),
            parabolic: s.count(CharType::Parabolic),
            elliptic: s.count(CharType::Elliptic),
            totally_degenerate: s.count(CharType::TotallyDegenerate),
            hyperbolic_fraction: s.fraction(CharType::Hyperbolic),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct TolerancesDto {
    pub divisibility: f64,
    pub lax: f64,
    pub strong: f64,
    pub char_type: f64,
}

impl From<&Tolerances> for TolerancesDto {
    fn from(t: &Tolerances) -> Self {
        Self {
            divisibility: t.divisibility,
            lax: t.lax,
            strong: t.strong,
            char_type: t.char_type,
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct SkippedDto {
    pub elliptic: usize,
    pub parabolic: usize,
    pub totally_degenerate: usize,
    pub near_parabolic: usize,
}

#[derive(Serialize, Clone, Debug)]
pub struct SampleDto {
    pub index: usize,
    pub point: PointDto,
    pub divisibility: bool,
    pub divisibility_residual: f64,
    pub lax_residuals: [f64; 2],
    pub lax: bool,
    pub strong_deviations: [f64; 2],
    pub strong: bool,
}

impl From<&EquivalenceSample> for SampleDto {
    fn from(s: &EquivalenceSample) -> Self {
        Self {
            index: s.index,
            point: (&s.point).into(),
            divisibility: s.divisibility,
            divisibility_residual: s.divisibility_residual,
            lax_residuals: s.lax,
            lax: s.lax_pass,
            strong_deviations: s.strong_deviation,
            strong: s.strong_pass,
        }
    }
}

pub const CRITERIA: [&str; 3] = ["divisibility", "lax", "strong-characteristic"];

#[derive(Serialize, Clone, Debug)]
pub struct EquivalenceDto {
    pub tolerances: TolerancesDto,
    pub sampled: usize,
    pub compared: usize,
    pub skipped: SkippedDto,
    pub criteria: [&'static str; 3],
    /// Pairwise agreement counts in `criteria` order.
    pub agreement: [[usize; 3]; 3],
    pub all_pass: usize,
    pub all_fail: usize,
    pub disagreements: Vec<SampleDto>,
}

impl EquivalenceDto {
    pub fn new(r: &EquivalenceReport, tols: &Tolerances) -> Self {
        Self {
            tolerances: tols.into(),
            sampled: r.sampled,
            compared: r.samples.len(),
            skipped: SkippedDto {
                elliptic: r.skipped_elliptic,
                parabolic: r.skipped_parabolic,
                totally_degenerate: r.skipped_degenerate,
                near_parabolic: r.skipped_near_parabolic,
            },
            criteria: CRITERIA,
            agreement: r.agreement_matrix(),
            all_pass: r.all_pass(),
            all_fail: r.all_fail(),
            disagreements: r.disagreements().map(Into::into).collect(),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct CharacteristicsDto {
    pub scan: Option<ScanDto>,
    pub equivalence: Option<EquivalenceDto>,
    pub error: Option<String>,
}

#[derive(Serialize, Clone, Debug)]
pub struct ExpectationDto {
    pub classification: Option<&'static str>,
    pub exceptional: Option<bool>,
}

#[derive(Serialize, Clone, Debug)]
pub struct CorpusEntryDto {
    pub name: String,
    pub seed: u64,
    pub notes: String,
    pub expected: ExpectationDto,
    pub observed: ExpectationDto,
    pub matches: bool,
    /// One line per mismatching field.
    pub diff: Vec<String>,
    pub report: ClassificationReport,
}

#[derive(Serialize, Clone, Debug)]
pub struct CorpusReport {
    pub kind: &'static str,
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub seed: u64,
    pub total: usize,
    pub matched: usize,
    pub entries: Vec<CorpusEntryDto>,
    pub duration_ms: Option<f64>,
    pub overall: &'static str,
    pub exit_code: i32,
}
