//! Frame, target, flow-report and path files.
//!
//! Frames are JSON `{"k", "N", "re", "im"}` with `k x N` nested row arrays,
//! or CSV with `2k` rows of `N` values (real parts, then imaginary parts).
//! Targets are JSON `{"S": {"re", "im"}, "r"}` or `{"lambda", "r"}`. Paths
//! are JSON lines: a header record, then one `{"t", "frame"}` per sample.
//! Floats are written in shortest round-trip form, so reading back any file
//! written here reproduces every value bit for bit.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fiberframe_core::{
    CMat, ConnectOptions, FiberTarget, FlowReport, FramePath, FrameMatrix, HermitianMatrix, NormSquaredVector,
    PathSample,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Core(#[from] fiberframe_core::Error),
}

pub type IoResult<T> = Result<T, IoError>;

fn parse_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read_text(path: &Path) -> IoResult<String> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `contents` to `path`, creating or truncating it.
pub fn write_text(path: &Path, contents: &str) -> IoResult<()> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(contents.as_bytes()))
        .map_err(|source| IoError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Split real/imaginary parts of a dense complex matrix, row by row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ComplexJson {
    pub fn from_mat(m: &CMat) -> Self {
        let rows = |part: fn(&fiberframe_core::C64) -> f64| {
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| part(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|c| c.re),
            im: rows(|c| c.im),
        }
    }

    /// Checks that both parts are `rows x cols` and returns them flattened.
    fn flatten(&self, rows: usize, cols: usize) -> Result<(Vec<f64>, Vec<f64>), String> {
        let flat = |name: &str, part: &[Vec<f64>]| {
            if part.len() != rows || part.iter().any(|r| r.len() != cols) {
                return Err(format!("\"{name}\" must be {rows} rows of {cols} values"));
            }
            Ok(part.concat())
        };
        Ok((flat("re", &self.re)?, flat("im", &self.im)?))
    }

    pub fn to_mat(&self) -> Result<CMat, String> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        let (re, im) = self.flatten(rows, cols)?;
        Ok(CMat::from_parts(rows, cols, &re, &im))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameJson {
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl FrameJson {
    pub fn from_frame(f: &FrameMatrix) -> Self {
        let c = ComplexJson::from_mat(f.as_mat());
        Self {
            k: f.k(),
            n: f.n(),
            re: c.re,
            im: c.im,
        }
    }

    pub fn to_frame(&self) -> Result<FrameMatrix, String> {
        let c = ComplexJson {
            re: self.re.clone(),
            im: self.im.clone(),
        };
        let (re, im) = c.flatten(self.k, self.n)?;
        FrameMatrix::from_parts(self.k, self.n, &re, &im).map_err(|e| e.to_string())
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a frame, choosing CSV for a `.csv` extension and JSON otherwise.
pub fn read_frame(path: &Path) -> IoResult<FrameMatrix> {
    let text = read_text(path)?;
    if is_csv(path) {
        parse_frame_csv(&text).map_err(|m| parse_err(path, m))
    } else {
        parse_frame_json(&text).map_err(|m| parse_err(path, m))
    }
}

pub fn parse_frame_json(text: &str) -> Result<FrameMatrix, String> {
    let raw: FrameJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    raw.to_frame()
}

pub fn parse_frame_csv(text: &str) -> Result<FrameMatrix, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| match field.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                Ok(_) => Err(format!("row {}, column {}: non-finite entry {field:?}", i + 1, j + 1)),
                Err(_) => Err(format!("row {}, column {}: not a number: {field:?}", i + 1, j + 1)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() || !rows.len().is_multiple_of(2) {
        return Err(format!("expected an even, positive number of rows (2k), found {}", rows.len()));
    }
    let k = rows.len() / 2;
    let n = rows[0].len();
    let re: Vec<f64> = rows[..k].concat();
    let im: Vec<f64> = rows[k..].concat();
    if re.len() != k * n || im.len() != k * n {
        return Err(format!("all rows must have {n} values"));
    }
    FrameMatrix::from_parts(k, n, &re, &im).map_err(|e| e.to_string())
}

pub fn frame_to_json(f: &FrameMatrix) -> String {
    let mut s = serde_json::to_string(&FrameJson::from_frame(f)).expect("finite floats serialize");
    s.push('\n');
    s
}

pub fn frame_to_csv(f: &FrameMatrix) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let m = f.as_mat();
    for part in [|c: fiberframe_core::C64| c.re, |c: fiberframe_core::C64| c.im] {
        for i in 0..f.k() {
            w.write_record((0..f.n()).map(|j| format!("{:?}", part(m[(i, j)]))))
                .expect("writing to memory");
        }
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("ascii output")
}

/// Writes a frame as CSV for a `.csv` extension and JSON otherwise.
pub fn write_frame(path: &Path, f: &FrameMatrix) -> IoResult<()> {
    let text = if is_csv(path) { frame_to_csv(f) } else { frame_to_json(f) };
    write_text(path, &text)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetJson {
    Operator {
        #[serde(rename = "S")]
        s: ComplexJson,
        r: Vec<f64>,
    },
    Spectrum {
        lambda: Vec<f64>,
        r: Vec<f64>,
    },
}

impl TargetJson {
    pub fn from_target(t: &FiberTarget) -> Self {
        TargetJson::Operator {
            s: ComplexJson::from_mat(t.s().as_mat()),
            r: t.r().values().to_vec(),
        }
    }

    /// Frame-operator target and squared norms, without any fiber checks.
    pub fn parts(&self) -> Result<(HermitianMatrix, NormSquaredVector), String> {
        let (s, r) = match self {
            TargetJson::Operator { s, r } => {
                let m = s.to_mat()?;
                if !m.is_square() || m.rows() == 0 {
                    return Err("\"S\" must be a non-empty square matrix".into());
                }
                (HermitianMatrix::new(m).map_err(|e| e.to_string())?, r)
            }
            TargetJson::Spectrum { lambda, r } => {
                if lambda.is_empty() || lambda.iter().any(|x| !x.is_finite()) {
                    return Err("\"lambda\" must be a non-empty list of finite values".into());
                }
                (HermitianMatrix::from_real_diagonal(lambda), r)
            }
        };
        let r = NormSquaredVector::new(r.clone()).map_err(|e| e.to_string())?;
        Ok((s, r))
    }
}

pub fn read_target_parts(path: &Path) -> IoResult<(HermitianMatrix, NormSquaredVector)> {
    let text = read_text(path)?;
    let raw: TargetJson = serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
    raw.parts().map_err(|m| parse_err(path, m))
}

/// Reads a square Hermitian matrix stored as `{"re", "im"}`.
pub fn read_hermitian(path: &Path) -> IoResult<HermitianMatrix> {
    let text = read_text(path)?;
    let raw: ComplexJson = serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
    let m = raw.to_mat().map_err(|m| parse_err(path, m))?;
    if !m.is_square() || m.rows() == 0 {
        return Err(parse_err(path, "expected a non-empty square matrix"));
    }
    HermitianMatrix::new(m).map_err(|e| parse_err(path, e.to_string()))
}

pub fn target_to_json(t: &FiberTarget) -> String {
    let mut s = serde_json::to_string(&TargetJson::from_target(t)).expect("finite floats serialize");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowReportJson {
    pub status: String,
    pub iterations: usize,
    pub final_residual: f64,
    pub residual_trace: Vec<f64>,
}

impl From<&FlowReport> for FlowReportJson {
    fn from(r: &FlowReport) -> Self {
        Self {
            status: r.status.as_str().to_string(),
            iterations: r.iterations,
            final_residual: r.final_residual,
            residual_trace: r.residual_trace.clone(),
        }
    }
}

pub const PATH_FORMAT: &str = "fiberframe-path";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectOptionsJson {
    pub path_tol: f64,
    pub delta: f64,
    pub delta_abs: f64,
    pub max_refine_depth: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl ConnectOptionsJson {
    pub fn new(opts: &ConnectOptions, start: &FrameMatrix) -> Self {
        Self {
            path_tol: opts.path_tol,
            delta: opts.delta,
            delta_abs: opts.delta * start.norm(),
            max_refine_depth: opts.max_refine_depth,
            max_restarts: opts.max_restarts,
            seed: opts.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathHeader {
    pub format: String,
    pub version: String,
    pub samples: usize,
    pub target: TargetJson,
    pub options: ConnectOptionsJson,
}

#[derive(Serialize, Deserialize)]
struct SampleJson {
    t: f64,
    frame: FrameJson,
}

pub fn path_to_jsonl(path: &FramePath, options: ConnectOptionsJson) -> String {
    let header = PathHeader {
        format: PATH_FORMAT.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        samples: path.samples.len(),
        target: TargetJson::from_target(&path.target),
        options,
    };
    let mut out = serde_json::to_string(&header).expect("finite floats serialize");
    out.push('\n');
    for s in &path.samples {
        let rec = SampleJson {
            t: s.t,
            frame: FrameJson::from_frame(&s.frame),
        };
        out.push_str(&serde_json::to_string(&rec).expect("finite floats serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_path_jsonl(text: &str) -> Result<(PathHeader, FramePath), String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or("empty path file")?;
    let header: PathHeader = serde_json::from_str(first).map_err(|e| format!("line 1: {e}"))?;
    if header.format != PATH_FORMAT {
        return Err(format!("line 1: unknown format {:?}", header.format));
    }
    let (s, r) = header.target.parts().map_err(|e| format!("line 1: {e}"))?;
    let target = FiberTarget::unchecked(s, r);
    let mut samples = Vec::new();
    for (i, line) in lines {
        let rec: SampleJson = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        let frame = rec.frame.to_frame().map_err(|e| format!("line {}: {e}", i + 1))?;
        samples.push(PathSample { t: rec.t, frame });
    }
    if samples.len() != header.samples {
        return Err(format!("header announces {} samples, found {}", header.samples, samples.len()));
    }
    Ok((header, FramePath { samples, target }))
}

pub fn read_path(path: &Path) -> IoResult<(PathHeader, FramePath)> {
    let text = read_text(path)?;
    parse_path_jsonl(&text).map_err(|m| parse_err(path, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_frame() -> FrameMatrix {
        let re = [0.1, -2.5e-17, 1.0 / 3.0, 7.0, 1e300, -0.0];
        let im = [core::f64::consts::PI, 0.0, -1.0, 5e-324, 2.0, 0.3];
        FrameMatrix::from_parts(2, 3, &re, &im).unwrap()
    }

    #[test]
    fn json_and_csv_round_trip_bitwise() {
        let f = sample_frame();
        assert_eq!(parse_frame_json(&frame_to_json(&f)).unwrap(), f);
        let g = parse_frame_csv(&frame_to_csv(&f)).unwrap();
        for (a, b) in f.as_mat().as_slice().iter().zip(g.as_mat().as_slice()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn readers_reject_bad_input() {
        assert!(parse_frame_csv("1,2\nnan,4\n0,0\n0,0\n").unwrap_err().contains("non-finite"));
        assert!(parse_frame_csv("1,inf\n0,0\n").is_err());
        assert!(parse_frame_csv("1,2\n3,4\n5,6\n").is_err());
        assert!(parse_frame_json("{\"k\":1,\"N\":2,\"re\":[[1,2]],\"im\":[[0]]}").is_err());
        assert!(parse_frame_json("{\"k\":1,").is_err());
    }

    #[test]
    fn target_forms() {
        let t: TargetJson = serde_json::from_str("{\"lambda\":[2,1],\"r\":[1,1,1]}").unwrap();
        let (s, r) = t.parts().unwrap();
        assert_eq!(s.eigenvalues(), vec![2.0, 1.0]);
        assert_eq!(r.values(), &[1.0, 1.0, 1.0]);
        let full = TargetJson::from_target(&FiberTarget::new(s, r).unwrap());
        let back: TargetJson = serde_json::from_str(&serde_json::to_string(&full).unwrap()).unwrap();
        assert_eq!(back, full);
    }
}
