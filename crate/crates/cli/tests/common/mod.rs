#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qmac_core::channels::json::compound_to_json;
use qmac_core::channels::library;
use qmac_core::{CompoundSet, KrausChannel};

pub fn qmac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmac")).args(args).output().expect("qmac runs")
}

pub fn qmac_ok(args: &[&str]) -> Output {
    let out = qmac(args);
    assert!(out.status.success(), "qmac {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Noise on B next to the identity on A, as a two-sender channel.
pub fn on_b(noise: KrausChannel) -> KrausChannel {
    let out = 2 * noise.out_dim();
    library::identity(2).tensor(&noise).with_dims(vec![2, 2], vec![out]).unwrap()
}

pub fn identity_qmac() -> KrausChannel {
    library::identity(4).with_dims(vec![2, 2], vec![4]).unwrap()
}

pub fn dephasing_pair(flip: f64) -> CompoundSet {
    CompoundSet::new(
        vec![on_b(library::dephasing(flip).unwrap()), on_b(library::bit_flip(flip).unwrap())],
        vec!["z-dephasing".into(), "x-dephasing".into()],
    )
    .unwrap()
}

pub fn write_set(dir: &Path, name: &str, set: &CompoundSet) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, compound_to_json(set).unwrap()).unwrap();
    path
}

pub fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
