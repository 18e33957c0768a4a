#![allow(dead_code)]

use std::path::PathBuf;

use homspec::ExperimentConfig;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.toml"))
}

pub fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::from_path(&config_path(name)).unwrap()
}

/// A fresh scratch directory under the system temp dir.
pub fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("homspec-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

/// `b = xi^2` on the unit line with the constant coefficient `value`.
pub fn constant_toml(value: f64) -> String {
    format!(
        r#"
id = "constant"
[lattice]
basis = [[1.0]]
[symbol]
order = 2
rows = 1
cols = 1
terms = [{{ index = [2], entries = [[1.0, 0.0]] }}]
[coefficient]
size = 1
terms = [{{ coords = [0], entries = [[{value}, 0.0]] }}]
[truncation]
cell = 4.5
[brillouin]
resolution = 64
radial = 40
angular = 1
[ladder]
start = 0.2
ratio = 0.5
count = 4
[rates]
taus = [1.0]
s = [5.0]
tail = 4
[evolve]
taus = [1.0]
band_limit = 8.5
xi_step = 0.05
time_steps = 16
sobolev = 6.0
ladder = {{ start = 0.04, ratio = 0.5, count = 2 }}
initial = {{ kind = "gaussian", sigma = 1.0, direction = [[1.0, 0.0]] }}
"#
    )
}

/// Random symbol and coefficient of the given shape.
pub fn random_toml(seed: u64, d: usize, n: usize, m: usize) -> String {
    let basis = if d == 1 { "[[1.0]]" } else { "[[1.0, 0.0], [0.3, 1.1]]" };
    format!(
        r#"
id = "random_{seed}"
seed = {seed}
[lattice]
basis = {basis}
[symbol]
order = 2
rows = {m}
cols = {n}
random = true
[coefficient]
size = {m}
random = {{ amplitude = 0.8 }}
[truncation]
cell = 3.2
"#
    )
}
