//! Regenerates the bundled fixtures under `fixtures/`.
//!
//! Both datasets are a tight Gaussian blob of positives (σ = 0.1 around the
//! origin) plus negatives placed 10σ from the centre in uniformly random
//! directions, with a little radial jitter.
//!
//! ```text
//! cargo run -p occsvm --example make_fixtures
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal, UnitSphere};

const SIGMA: f64 = 0.1;
const NEGATIVE_DISTANCE: f64 = 10.0 * SIGMA;

fn blob(rng: &mut ChaCha8Rng, n_pos: usize, n_neg: usize, dim: usize) -> Vec<(bool, Vec<f64>)> {
    let mut rows = Vec::with_capacity(n_pos + n_neg);
    for _ in 0..n_pos {
        let x = (0..dim).map(|_| SIGMA * rng.sample::<f64, _>(StandardNormal)).collect();
        rows.push((true, x));
    }
    let jitter = Normal::new(0.0, 0.1 * SIGMA).unwrap();
    for _ in 0..n_neg {
        let dir = unit_vector(rng, dim);
        let r = NEGATIVE_DISTANCE + rng.sample(jitter);
        rows.push((false, dir.iter().map(|d| r * d).collect()));
    }
    rows
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    if dim == 3 {
        let v: [f64; 3] = rng.sample(UnitSphere);
        return v.to_vec();
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(&dir).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut text = String::new();
    for (positive, x) in blob(&mut rng, 250, 250, 2) {
        text.push_str(if positive { "1" } else { "-1" });
        for (j, v) in x.iter().enumerate() {
            let _ = write!(text, " {}:{v:.6}", j + 1);
        }
        text.push('\n');
    }
    fs::write(dir.join("blob.svm"), text).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(20240602);
    let mut text = String::from("x1,x2,x3,label\n");
    for (positive, x) in blob(&mut rng, 120, 40, 3) {
        let cells: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(text, "{},{}", cells.join(","), if positive { 1 } else { 0 });
    }
    fs::write(dir.join("blob.csv"), text).unwrap();
}
