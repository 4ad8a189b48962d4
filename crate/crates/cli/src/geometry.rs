use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spinning_zeta::geometry::{default_step, Geometry, PlanePoint, SetId, SpinParameter};

use crate::config::RunConfig;
use crate::output::{Header, GEOMETRY_SCHEMA};
use crate::{CliError, Outcome, Status};

pub const RECONSTRUCTION_LIMIT: f64 = 1e-12;
pub const OPERATOR_LIMIT: f64 = 1e-6;
const R_MAX: f64 = 10.0;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SetSummary {
    pub set: u8,
    pub max_upper: f64,
    pub max_lower: f64,
    pub max_lower_imag: f64,
    pub max_operator_rel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometrySummary {
    #[serde(flatten)]
    pub header: Header,
    pub lambda: f64,
    pub points: usize,
    pub seed: u64,
    pub max_metric_pair: f64,
    pub sets: Vec<SetSummary>,
    pub reconstruction_limit: f64,
    pub operator_limit: f64,
    pub pass: bool,
}

/// Points with r uniform on (r_min, 10] and uniform angle, or the single
/// forced point.
fn sample_points(cfg: &RunConfig) -> Vec<PlanePoint> {
    if let Some([x, y]) = cfg.point {
        return vec![PlanePoint::new(x, y)];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.points)
        .map(|_| {
            let r = cfg.r_min + (R_MAX - cfg.r_min) * (1.0 - rng.random::<f64>());
            let th = std::f64::consts::TAU * rng.random::<f64>();
            PlanePoint::new(r * th.cos(), r * th.sin())
        })
        .collect()
}

/// max |derived − closed| over both coefficients, relative to the larger
/// closed coefficient (absolute when both vanish).
fn operator_deviation(g: &Geometry, set: SetId, pt: PlanePoint, sp: SpinParameter) -> spinning_zeta::Result<f64> {
    let closed = g.hi_coefficients_closed(set, pt, sp)?;
    let derived = g.hi_coefficients_derived(set, pt, sp, default_step(pt))?;
    let diff = (derived.c1 - closed.c1).norm().max((derived.c2 - closed.c2).norm());
    let scale = closed.c1.norm().max(closed.c2.norm());
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

pub fn summarize(cfg: &RunConfig) -> Result<GeometrySummary, CliError> {
    let g = Geometry::new(cfg.r_min)?;
    let sp = SpinParameter::new(cfg.lambda)?;
    let pts = sample_points(cfg);
    let mut pair = 0.0f64;
    let mut sets = Vec::new();
    for set in [SetId::One, SetId::Two].into_iter().filter(|s| cfg.set.is_none_or(|n| n == s.number())) {
        let mut s = SetSummary { set: set.number(), ..Default::default() };
        for &pt in &pts {
            let rec = g.reconstruction(set, pt, sp)?;
            s.max_upper = s.max_upper.max(rec.upper);
            s.max_lower = s.max_lower.max(rec.lower);
            s.max_lower_imag = s.max_lower_imag.max(rec.lower_imag);
            s.max_operator_rel = s.max_operator_rel.max(operator_deviation(&g, set, pt, sp)?);
        }
        sets.push(s);
    }
    for &pt in &pts {
        pair = pair.max(g.check_metric_pair(pt, sp)?);
    }
    let pass = pair < RECONSTRUCTION_LIMIT
        && sets.iter().all(|s| {
            s.max_upper < RECONSTRUCTION_LIMIT
                && s.max_lower < RECONSTRUCTION_LIMIT
                && s.max_lower_imag < RECONSTRUCTION_LIMIT
                && s.max_operator_rel < OPERATOR_LIMIT
        });
    Ok(GeometrySummary {
        header: Header::new(GEOMETRY_SCHEMA),
        lambda: cfg.lambda,
        points: pts.len(),
        seed: cfg.seed,
        max_metric_pair: pair,
        sets,
        reconstruction_limit: RECONSTRUCTION_LIMIT,
        operator_limit: OPERATOR_LIMIT,
        pass,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let summary = summarize(cfg)?;
    let body = match cfg.format {
        crate::config::Format::Json => serde_json::to_string(&summary).expect("summary serializes") + "\n",
        crate::config::Format::Csv => {
            let mut out = summary.header.csv_line() + "\nset,max_upper,max_lower,max_lower_imag,max_operator_rel\n";
            for s in &summary.sets {
                out += &format!(
                    "{},{},{},{},{}\n",
                    s.set, s.max_upper, s.max_lower, s.max_lower_imag, s.max_operator_rel
                );
            }
            out
        }
    };
    let status = if summary.pass { Status::Pass } else { Status::Failed };
    Ok(Outcome { body, status, notes: Vec::new() })
}
