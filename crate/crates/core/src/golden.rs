//! Golden detection records: self-contained regression vectors.
//!
//! A record stores one complete detection problem (triangularized
//! observation, upper-triangular channel factor, a-priori LLRs, noise
//! variance, detector configuration) together with the detector outputs
//! (MAP metric, MAP labels, examined-node count, extrinsic LLRs).
//! Records round-trip through a line-oriented text format whose floats
//! use the shortest exact decimal representation, so export → read →
//! export is byte-identical. Checking re-runs the detector on the
//! stored inputs and compares against the stored outputs.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{RngExt as _, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::constellation::Constellation;
use crate::detector::{detect, DetectorConfig, EnumMode};
use crate::llr::LlrFrame;
use crate::mimo::{preprocess, qrd, sample_channel, sqrd, transmit, CMat};
use crate::Error;

/// Absolute tolerance for metric and LLR comparison on check.
pub const CHECK_TOL: f64 = 1e-9;

const HEADER: &str = "# detection golden records v1";

/// One stored detection problem with its expected outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRecord {
    pub name: String,
    pub mt: usize,
    pub q: usize,
    pub n0: f64,
    pub l_e_max: f64,
    pub enum_mode: EnumMode,
    pub y_tilde: Vec<Complex64>,
    pub r: CMat,
    pub l_a: Vec<f64>,
    pub lambda: f64,
    pub x_map: Vec<usize>,
    pub n_en: u64,
    pub l_e: Vec<f64>,
}

impl GoldenRecord {
    fn config(&self) -> DetectorConfig {
        DetectorConfig {
            l_e_max: self.l_e_max,
            enum_mode: self.enum_mode,
            use_normalized_metrics: false,
            node_budget: None,
        }
    }
}

fn fmt_floats(out: &mut String, key: &str, vals: impl IntoIterator<Item = f64>) {
    out.push_str(key);
    for v in vals {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
}

/// Serializes records to the text format.
pub fn records_to_string(records: &[GoldenRecord]) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for rec in records {
        writeln!(out, "record {}", rec.name).unwrap();
        writeln!(out, "mt {}", rec.mt).unwrap();
        writeln!(out, "q {}", rec.q).unwrap();
        writeln!(out, "n0 {}", rec.n0).unwrap();
        writeln!(out, "l_e_max {}", rec.l_e_max).unwrap();
        writeln!(out, "enum_mode {}", rec.enum_mode).unwrap();
        fmt_floats(&mut out, "y_tilde", rec.y_tilde.iter().flat_map(|c| [c.re, c.im]));
        let rr = &rec.r;
        fmt_floats(
            &mut out,
            "r",
            (0..rr.rows())
                .flat_map(|i| (0..rr.cols()).map(move |j| rr.get(i, j)))
                .flat_map(|c| [c.re, c.im]),
        );
        fmt_floats(&mut out, "l_a", rec.l_a.iter().copied());
        writeln!(out, "lambda {}", rec.lambda).unwrap();
        out.push_str("x_map");
        for &x in &rec.x_map {
            write!(out, " {x}").unwrap();
        }
        out.push('\n');
        writeln!(out, "n_en {}", rec.n_en).unwrap();
        fmt_floats(&mut out, "l_e", rec.l_e.iter().copied());
        out.push_str("end\n");
    }
    out
}

fn parse_f64s(rest: &str, key: &str) -> Result<Vec<f64>, Error> {
    rest.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad float `{t}` in `{key}` line")))
        })
        .collect()
}

fn open_record<'a>(
    cur: &'a mut Option<GoldenRecord>,
    key: &str,
) -> Result<&'a mut GoldenRecord, Error> {
    cur.as_mut().ok_or_else(|| Error::Parse(format!("`{key}` outside a record")))
}

/// Parses records from the text format.
pub fn records_from_str(text: &str) -> Result<Vec<GoldenRecord>, Error> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h == HEADER => {}
        _ => return Err(Error::Parse("missing golden-record header".into())),
    }
    let mut records = Vec::new();
    let mut cur: Option<GoldenRecord> = None;
    for line in lines {
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        
        let usizes = |rest: &str| -> Result<Vec<usize>, Error> {
            rest.split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad integer `{t}`")))
                })
                .collect()
        };
        match key {
            "record" => {
                if cur.is_some() {
                    return Err(Error::Parse("record without `end`".into()));
                }
                cur = Some(GoldenRecord {
                    name: rest.to_string(),
                    mt: 0,
                    q: 0,
                    n0: 0.0,
                    l_e_max: f64::INFINITY,
                    enum_mode: EnumMode::Hybrid,
                    y_tilde: Vec::new(),
                    r: CMat::zeros(0, 0),
                    l_a: Vec::new(),
                    lambda: 0.0,
                    x_map: Vec::new(),
                    n_en: 0,
                    l_e: Vec::new(),
                });
            }
            "mt" => open_record(&mut cur, key)?.mt = usizes(rest)?[0],
            "q" => open_record(&mut cur, key)?.q = usizes(rest)?[0],
            "n0" => open_record(&mut cur, key)?.n0 = parse_f64s(rest, key)?[0],
            "l_e_max" => open_record(&mut cur, key)?.l_e_max = parse_f64s(rest, key)?[0],
            "enum_mode" => open_record(&mut cur, key)?.enum_mode = rest.parse()?,
            "y_tilde" => {
                let v = parse_f64s(rest, key)?;
                open_record(&mut cur, key)?.y_tilde =
                    v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            }
            "r" => {
                let v = parse_f64s(rest, key)?;
                let r = open_record(&mut cur, key)?;
                let n = r.mt;
                if v.len() != 2 * n * n {
                    return Err(Error::Parse("wrong `r` entry count".into()));
                }
                let data = v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
                r.r = CMat::from_rows(n, n, data);
            }
            "l_a" => open_record(&mut cur, key)?.l_a = parse_f64s(rest, key)?,
            "lambda" => open_record(&mut cur, key)?.lambda = parse_f64s(rest, key)?[0],
            "x_map" => open_record(&mut cur, key)?.x_map = usizes(rest)?,
            "n_en" => {
                open_record(&mut cur, key)?.n_en = rest
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad node count `{rest}`")))?
            }
            "l_e" => open_record(&mut cur, key)?.l_e = parse_f64s(rest, key)?,
            "end" => {
                records
                    .push(cur.take().ok_or_else(|| Error::Parse("`end` outside a record".into()))?);
            }
            other => return Err(Error::Parse(format!("unknown golden-record key `{other}`"))),
        }
    }
    if cur.is_some() {
        return Err(Error::Parse("unterminated record at end of file".into()));
    }
    Ok(records)
}

pub fn write_records(records: &[GoldenRecord], path: &Path) -> Result<(), Error> {
    std::fs::write(path, records_to_string(records)).map_err(Error::from)
}

pub fn read_records(path: &Path) -> Result<Vec<GoldenRecord>, Error> {
    records_from_str(&std::fs::read_to_string(path)?)
}

/// Re-runs the detector on each record and compares outputs. The MAP
/// labels and node count must match exactly; the MAP metric and
/// extrinsic LLRs within [`CHECK_TOL`].
pub fn check_records(records: &[GoldenRecord]) -> Result<(), Error> {
    for rec in records {
        let con = Constellation::build_qam(rec.q, None)?;
        let l_a = LlrFrame::from_rows(rec.mt, rec.q, rec.l_a.clone());
        let res = detect(&rec.y_tilde, &rec.r, &con, &l_a, rec.n0, &rec.config())?;
        let mismatch = |field: &str| {
            Err(Error::GoldenMismatch {
                record: rec.name.clone(),
                detail: format!("{field} differs from the stored value"),
            })
        };
        if res.x_map != rec.x_map {
            return mismatch("x_map");
        }
        if res.n_en != rec.n_en {
            return mismatch("n_en");
        }
        if (res.lambda_map - rec.lambda).abs() > CHECK_TOL {
            return mismatch("lambda");
        }
        for (got, want) in res.l_e.as_slice().iter().zip(&rec.l_e) {
            if (got - want).abs() > CHECK_TOL {
                return mismatch("l_e");
            }
        }
    }
    Ok(())
}

/// Generates the standard deterministic golden suite: a spread of
/// antenna counts, modulations, enumeration modes and clipping levels,
/// with decoder-feedback-like random a-priori LLRs on half the records.
/// Channel factors alternate between sorted and plain QR so both
/// preprocessing variants are pinned.
pub fn generate_records(seed: u64) -> Vec<GoldenRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let cases: [(usize, usize, EnumMode, f64, bool); 8] = [
        (2, 2, EnumMode::Hybrid, f64::INFINITY, false),
        (2, 2, EnumMode::FullSortSe, f64::INFINITY, true),
        (2, 2, EnumMode::Hybrid, 0.2, true),
        (4, 4, EnumMode::Hybrid, f64::INFINITY, false),
        (4, 4, EnumMode::Hybrid, f64::INFINITY, true),
        (4, 4, EnumMode::FullSortSe, 0.8, true),
        (4, 4, EnumMode::Hybrid, 0.2, true),
        (4, 4, EnumMode::ChannelOnly, f64::INFINITY, false),
    ];
    cases
        .iter()
        .enumerate()
        .map(|(idx, &(mt, q, enum_mode, norm_clip, with_apriori))| {
            let con = Constellation::build_qam(q, None).unwrap();
            let n0 = 0.5;
            let h = sample_channel(mt, mt, &mut rng);
            let s: Vec<Complex64> = (0..mt)
                .map(|_| con.point(rng.random_range(0..con.len())))
                .collect();
            let y = transmit(&h, &s, n0, &mut rng);
            let f = if idx % 2 == 0 { sqrd(&h) } else { qrd(&h) }.unwrap();
            let y_tilde = preprocess(&f, &y);
            let l_a: Vec<f64> = (0..mt * q)
                .map(|_| if with_apriori { rng.random_range(-3.0..3.0) } else { 0.0 })
                .collect();
            let mut rec = GoldenRecord {
                name: format!("case-{idx}"),
                mt,
                q,
                n0,
                l_e_max: norm_clip / n0,
                enum_mode,
                y_tilde,
                r: f.r,
                l_a: l_a.clone(),
                lambda: 0.0,
                x_map: Vec::new(),
                n_en: 0,
                l_e: Vec::new(),
            };
            let frame = LlrFrame::from_rows(mt, q, l_a);
            let res =
                detect(&rec.y_tilde, &rec.r, &con, &frame, n0, &rec.config()).unwrap();
            rec.lambda = res.lambda_map;
            rec.x_map = res.x_map.clone();
            rec.n_en = res.n_en;
            rec.l_e = res.l_e.as_slice().to_vec();
            rec
        })
        .collect()
}
