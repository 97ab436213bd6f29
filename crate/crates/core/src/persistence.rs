//! Checkpoint and dataset files.
//!
//! # Checkpoint format (version 1)
//!
//! Line-oriented UTF-8 text, `\n` line endings:
//!
//! ```text
//! batchprop-checkpoint 1
//! topology 2,2,2
//! eta 5e-1
//! batch_size 4
//! shards 1
//! seed 42
//! epochs_completed 0
//! layers 2
//! layer 0 3 2
//! <row 0 values, space separated>
//! ...
//! layer 1 3 2
//! ...
//! end
//! ```
//!
//! Reals use Rust's `{:e}` formatting, the shortest decimal that parses
//! back to the same `f64`, so save→load→save is byte-identical. The `end`
//! line makes truncation detectable.
//!
//! # Dataset format
//!
//! CSV with a header of `x`-prefixed input columns followed by `t`-prefixed
//! target columns, e.g. `x1,x2,t1`. Every data row carries one finite
//! number per column.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::network::{Network, Topology};
use crate::tensor::Matrix;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "batchprop-checkpoint";

/// Training settings stored alongside the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFingerprint {
    pub eta: f64,
    pub batch_size: usize,
    pub shards: usize,
    pub seed: u64,
    pub epochs_completed: usize,
}

pub fn encode_checkpoint(net: &Network, meta: &RunFingerprint) -> String {
    let mut out = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(out, "{MAGIC} {CHECKPOINT_VERSION}");
    let _ = writeln!(out, "topology {}", net.topology());
    let _ = writeln!(out, "eta {:e}", meta.eta);
    let _ = writeln!(out, "batch_size {}", meta.batch_size);
    let _ = writeln!(out, "shards {}", meta.shards);
    let _ = writeln!(out, "seed {}", meta.seed);
    let _ = writeln!(out, "epochs_completed {}", meta.epochs_completed);
    let _ = writeln!(out, "layers {}", net.depth());
    for (l, w) in net.weights().iter().enumerate() {
        let _ = writeln!(out, "layer {l} {} {}", w.rows(), w.cols());
        for row in w.iter_rows() {
            let vals: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", vals.join(" "));
        }
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    path: &'a Path,
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Malformed {
            path: self.path.to_path_buf(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next_line(&mut self, what: &str) -> Result<&'a str> {
        match self.iter.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => {
                self.line += 1;
                Err(self.err(format!("unexpected end of file, expected {what}")))
            }
        }
    }

    /// Reads `key value` and returns the value text.
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line(key)?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(self.err(format!("expected `{key} <value>`, found `{line}`"))),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.field(key)?;
        v.parse()
            .map_err(|_| self.err(format!("invalid {key} `{v}`")))
    }
}

pub fn decode_checkpoint(text: &str, path: &Path) -> Result<(Network, RunFingerprint)> {
    let mut lines = Lines {
        path,
        iter: text.lines().enumerate(),
        line: 0,
    };
    let version: u32 = lines.parsed(MAGIC)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Version {
            path: path.to_path_buf(),
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let topo_text = lines.field("topology")?;
    let topology: Topology = topo_text
        .parse()
        .map_err(|e: Error| lines.err(e.to_string()))?;
    let eta: f64 = lines.parsed("eta")?;
    if !eta.is_finite() {
        return Err(lines.err(format!("non-finite eta {eta}")));
    }
    let batch_size = lines.parsed("batch_size")?;
    let shards = lines.parsed("shards")?;
    let seed = lines.parsed("seed")?;
    let epochs_completed = lines.parsed("epochs_completed")?;
    let layers: usize = lines.parsed("layers")?;
    if layers != topology.depth() {
        return Err(lines.err(format!(
            "{layers} layers declared but topology {topology} has {}",
            topology.depth()
        )));
    }

    let mut weights = Vec::with_capacity(layers);
    for (l, (rows, cols)) in topology.weight_shapes().enumerate() {
        let header = lines.next_line("layer header")?;
        let expected = format!("layer {l} {rows} {cols}");
        if header != expected {
            return Err(lines.err(format!("expected `{expected}`, found `{header}`")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let row = lines.next_line("weight row")?;
            let start = data.len();
            for tok in row.split(' ') {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| lines.err(format!("invalid weight `{tok}`")))?;
                if !v.is_finite() {
                    return Err(lines.err(format!("non-finite weight `{tok}`")));
                }
                data.push(v);
            }
            if data.len() - start != cols {
                return Err(lines.err(format!(
                    "expected {cols} values, found {}",
                    data.len() - start
                )));
            }
        }
        weights.push(Matrix::new(rows, cols, data)?);
    }
    let tail = lines.next_line("`end`")?;
    if tail != "end" {
        return Err(lines.err(format!("expected `end`, found `{tail}`")));
    }
    if let Some((i, extra)) = lines.iter.next() {
        lines.line = i + 1;
        return Err(lines.err(format!("trailing content `{extra}`")));
    }

    let network = Network::from_weights(weights)?;
    Ok((
        network,
        RunFingerprint {
            eta,
            batch_size,
            shards,
            seed,
            epochs_completed,
        },
    ))
}

pub fn save_checkpoint(net: &Network, meta: &RunFingerprint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(net, meta)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Network, RunFingerprint)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&text, path)
}

/// Inputs and targets with matching row order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Matrix,
    pub targets: Matrix,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn malformed(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        line: line as usize,
        msg: msg.into(),
    }
}

/// Splits a header into input and target widths.
fn header_widths(path: &Path, header: &csv::StringRecord) -> Result<(usize, usize)> {
    let inputs = header.iter().take_while(|h| h.starts_with('x')).count();
    let targets = header
        .iter()
        .skip(inputs)
        .take_while(|h| h.starts_with('t'))
        .count();
    if inputs == 0 || targets == 0 || inputs + targets != header.len() {
        return Err(malformed(
            path,
            1,
            format!(
                "header must be x-prefixed inputs then t-prefixed targets, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok((inputs, targets))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        malformed(path, line, e.to_string())
    };

    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_err)?,
        None => return Err(malformed(path, 1, "file is empty, expected a header row")),
    };
    let (n_in, n_out) = header_widths(path, &header)?;
    let width = n_in + n_out;

    let mut x = Vec::new();
    let mut t = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != width {
            return Err(malformed(
                path,
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    malformed(
                        path,
                        line,
                        format!("column {}: `{field}` is not a finite number", col + 1),
                    )
                })?;
            if col < n_in {
                x.push(v);
            } else {
                t.push(v);
            }
        }
    }
    let rows = x.len() / n_in;
    if rows == 0 {
        return Err(Error::EmptyDataset {
            path: path.to_path_buf(),
        });
    }
    Ok(Dataset {
        inputs: Matrix::new(rows, n_in, x)?,
        targets: Matrix::new(rows, n_out, t)?,
    })
}

/// Writes `inputs`/`targets` in the dataset format, one row per line.
pub fn save_dataset(path: impl AsRef<Path>, inputs: &Matrix, targets: &Matrix) -> Result<()> {
    let path = path.as_ref();
    if inputs.rows() != targets.rows() {
        return Err(Error::shape(
            "save_dataset",
            inputs.shape(),
            targets.shape(),
        ));
    }
    let mut out = String::new();
    let header: Vec<String> = (1..=inputs.cols())
        .map(|i| format!("x{i}"))
        .chain((1..=targets.cols()).map(|i| format!("t{i}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (xr, tr) in inputs.iter_rows().zip(targets.iter_rows()) {
        let fields: Vec<String> = xr.iter().chain(tr).map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(PathBuf::from(path), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    fn meta() -> RunFingerprint {
        RunFingerprint {
            eta: 0.5,
            batch_size: 4,
            shards: 1,
            seed: 42,
            epochs_completed: 0,
        }
    }

    fn fake() -> &'static Path {
        Path::new("mem.ckpt")
    }

    #[test]
    fn golden_layout() {
        let topo = Topology::new(vec![1, 1]).unwrap();
        let mut net = Network::zeros(&topo);
        net.weights_mut()[0] = Matrix::new(2, 1, vec![0.1, -2.5e-7]).unwrap();
        let text = encode_checkpoint(&net, &meta());
        assert_eq!(
            text,
            "batchprop-checkpoint 1\ntopology 1,1\neta 5e-1\nbatch_size 4\nshards 1\nseed 42\n\
             epochs_completed 0\nlayers 1\nlayer 0 2 1\n1e-1\n-2.5e-7\nend\n"
        );
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let net = Network::init(&Topology::new(vec![3, 5, 2]).unwrap(), 99);
        let text = encode_checkpoint(&net, &meta());
        let (back, m) = decode_checkpoint(&text, fake()).unwrap();
        assert_eq!(m, meta());
        for (a, b) in net.weights().iter().zip(back.weights()) {
            let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
        }
        assert_eq!(encode_checkpoint(&back, &m), text);
    }

    #[test]
    fn every_truncation_is_rejected() {
        let net = Network::init(&Topology::new(vec![2, 3, 2]).unwrap(), 5);
        let text = encode_checkpoint(&net, &meta());
        // Dropping only the final newline leaves an equivalent file.
        for cut in 0..text.len() - 1 {
            assert!(
                decode_checkpoint(&text[..cut], fake()).is_err(),
                "prefix {cut} parsed"
            );
        }
    }

    #[test]
    fn diagnostics() {
        let net = Network::init(&Topology::new(vec![2, 2]).unwrap(), 5);
        let text = encode_checkpoint(&net, &meta());

        let v2 = text.replacen("checkpoint 1", "checkpoint 2", 1);
        assert!(matches!(
            decode_checkpoint(&v2, fake()),
            Err(Error::Version { found: 2, .. })
        ));

        let bad = text.replacen("layer 0 3 2", "layer 0 4 2", 1);
        match decode_checkpoint(&bad, fake()) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }

        let lines: Vec<&str> = text.lines().collect();
        let mut tampered = lines.clone();
        tampered[9] = "1e0 abc";
        let tampered = tampered.join("\n");
        match decode_checkpoint(&tampered, fake()) {
            Err(Error::Malformed { line, msg, .. }) => {
                assert_eq!(line, 10);
                assert!(msg.contains("abc"));
            }
            other => panic!("{other:?}"),
        }

        let trailing = format!("{text}junk\n");
        assert!(decode_checkpoint(&trailing, fake()).is_err());
        assert!(decode_checkpoint(&text.replacen("eta 5e-1", "eta NaN", 1), fake()).is_err());
        assert!(decode_checkpoint(&text.replacen("layers 1", "layers 2", 1), fake()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let net = Network::init(&Topology::new(vec![2, 2, 2]).unwrap(), 42);
        save_checkpoint(&net, &meta(), &path).unwrap();
        let (back, _) = load_checkpoint(&path).unwrap();
        assert_eq!(back, net);
        assert!(matches!(
            load_checkpoint(dir.path().join("missing")),
            Err(Error::Io { .. })
        ));
    }

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn dataset_loading() {
        let dir = tempfile::tempdir().unwrap();
        let xor = write(&dir, "xor.csv", "x1,x2,t1\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n");
        let ds = load_dataset(&xor).unwrap();
        assert_eq!(ds.inputs.shape(), (4, 2));
        assert_eq!(ds.targets.shape(), (4, 1));
        assert_eq!(ds.targets.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(ds.inputs.row(2), &[1.0, 0.0]);

        let header_only = write(&dir, "h.csv", "x1,t1\n");
        assert!(matches!(
            load_dataset(&header_only),
            Err(Error::EmptyDataset { .. })
        ));

        let empty = write(&dir, "e.csv", "");
        assert!(matches!(
            load_dataset(&empty),
            Err(Error::Malformed { line: 1, .. })
        ));

        let ragged = write(&dir, "r.csv", "x1,x2,t1\n0,0,0\n0,1\n");
        match load_dataset(&ragged) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }

        let text = write(&dir, "n.csv", "x1,t1\n1,2\n3,abc\n");
        match load_dataset(&text) {
            Err(e @ Error::Malformed { line: 3, .. }) => assert!(e.to_string().contains("abc")),
            other => panic!("{other:?}"),
        }

        let inf = write(&dir, "i.csv", "x1,t1\n1,inf\n");
        assert!(load_dataset(&inf).is_err());

        for bad_header in [
            "a,b\n1,2\n",
            "x1,x2\n1,2\n",
            "t1,x1\n1,2\n",
            "x1,t1,x2\n1,2,3\n",
        ] {
            let p = write(&dir, "bh.csv", bad_header);
            assert!(
                matches!(load_dataset(&p), Err(Error::Malformed { line: 1, .. })),
                "{bad_header}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn dataset_round_trip(seed in any::<u64>(), n_in in 1usize..5, n_out in 1usize..4) {
            let dir = tempfile::tempdir().unwrap();
            let mut rng = SeededRng::new(seed);
            let x = Matrix::from_fn(1000, n_in, |_, _| rng.uniform(-1e3, 1e3));
            let t = Matrix::from_fn(1000, n_out, |_, _| rng.uniform(-1.0, 1.0));
            let p = dir.path().join("d.csv");
            save_dataset(&p, &x, &t).unwrap();
            let ds = load_dataset(&p).unwrap();
            prop_assert_eq!(ds.inputs, x);
            prop_assert_eq!(ds.targets, t);
        }
    }
}
