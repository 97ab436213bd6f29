#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use batchprop::persistence::save_dataset;
use batchprop::rng::SeededRng;
use batchprop::Matrix;

pub const BIN: &str = env!("CARGO_BIN_EXE_batchprop");

pub fn batchprop(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("spawn batchprop")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn xor() -> (Matrix, Matrix) {
    let x = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
    let t = Matrix::from_rows(&[[0.0], [1.0], [1.0], [0.0]]).unwrap();
    (x, t)
}

pub fn write_xor(dir: &Path) -> PathBuf {
    let path = dir.join("xor.csv");
    let (x, t) = xor();
    save_dataset(&path, &x, &t).unwrap();
    path
}

/// `rows` points in `[-1, 1)²` labelled by a smooth two-output function.
pub fn synthetic(rows: usize, seed: u64) -> (Matrix, Matrix) {
    let mut rng = SeededRng::new(seed);
    let x = Matrix::new(
        rows,
        2,
        (0..rows * 2).map(|_| rng.uniform(-1.0, 1.0)).collect(),
    )
    .unwrap();
    let t = Matrix::new(
        rows,
        2,
        x.iter_rows()
            .flat_map(|r| {
                let inside = if r[0] * r[0] + r[1] * r[1] < 0.5 {
                    1.0
                } else {
                    0.0
                };
                [inside, 0.5 + 0.4 * (r[0] * r[1])]
            })
            .collect(),
    )
    .unwrap();
    (x, t)
}

pub fn write_synthetic(dir: &Path, rows: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("synthetic_{rows}.csv"));
    let (x, t) = synthetic(rows, seed);
    save_dataset(&path, &x, &t).unwrap();
    path
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
