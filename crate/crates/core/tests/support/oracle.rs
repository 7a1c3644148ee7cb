//! Straight-line arithmetic for every catalogued closed form, written
//! independently of the library's formula table.

use corona_core::models::ModelId;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn lg(x: f64) -> f64 {
    x.ln() / std::f64::consts::LN_10
}

pub fn oracle(id: ModelId, e: f64, n: f64, d: f64) -> f64 {
    use ModelId::*;
    match id {
        AnDiscovered3 => {
            let a = 0.0878 * e * n;
            let b = 72.3 * lg(d);
            let c = 648.7 / (e * lg(e));
            a + b - c
        }
        AnDiscovered4 => 0.093 * e * n + 55.02 * lg(d) - 591.0 / (e * d.powi(2)) - 5448.0 / e.powi(2),
        AnDiscovered5 => {
            let t1 = 0.0116 * n.powi(2) * d;
            let t2 = 102.4 * n / (e * e.ln() + d.powi(2));
            t1 - t2 + 9.216 * d + 19.13 * n.ln() - 677.3 / e
        }
        AnPolyBaseline => 1.022 * n + 10.4 * d + 30.839 - 933.633 / e,
        AnBpa => 120.0 * lg(e) + 55.0 * lg(d) + 26.4 * lg(n) - 128.4,
        AnEnel => 85.0 * lg(e) + 45.0 * lg(d) + 18.0 * lg(n) - 71.0,
        AnIreq => 72.0 * lg(e) + 45.81 * lg(d) + 22.71 * lg(n) - 57.6,
        AnFgh => 2.0 * e + 45.0 * lg(d) + 18.0 * lg(n) - 0.3,
        AnGe => -655.0 / e + 44.0 * lg(d) + 20.0 * lg(n) + 67.9,
        AnEpri => 120.0 * lg(e) + 54.0 * lg(d) + 24.8 - 126.0,
        AnPysr => 1.58 * n * d - 2.97 * n + 55.6 - 915.0 / e,
        AnDso => -2.65 * e * d / n.powi(2) + 62.8 * d - 64.8 * d / lg(e) + 0.47 * n - 17.0,
        RiDiscovered3 => 45.6 * lg(e) - 819.5 / (d * (e - 1.0)) + 0.07 * n * d.powi(2),
        RiDiscovered4 => {
            -117.2 * n / (n.powi(2) * d - d) - 133.5 * n / (e + n * d.powi(2)) + 98.68 - 629.7 / e
        }
        RiDiscovered5 => -45.87 * e / (n.powi(3) * d) + 4.499 * d + 72.88 - 522.2 / e - 543.4 / (e * d),
        RiPolyBaseline => 6.51 * d + 10.287 * lg(n) + 55.22 - 671.7 / e,
        RiBpa => 120.0 * lg(e / 15.0) + 40.0 * lg(d / 4.0) + 37.02,
        RiCigre => 3.5 * e + 6.0 * d - 40.69,
        RiEpri => -580.0 / e + 38.0 * lg(d / 3.8) + if n > 8.0 { 86.1 } else { 81.1 },
        RiCispr => 70.0 - 580.0 / e + 35.0 * lg(d) - 10.0 * lg(n),
        RiIreq => {
            let k = match n as u32 {
                1 => 0.0,
                2 => 3.7,
                _ => 6.0,
            };
            -90.25 + 92.42 * lg(e) + 43.03 * lg(d) - k
        }
        RiPysr => 0.51 * (d + 158.407) * ((n - 6.35) * e).ln().ln() - 613.0,
        RiDso => 11.1 * e / n + 18.2 * d - 68.6 * d / n + 0.99 * n - 16.1,
    }
}

/// A random in-domain bundle for `id`.
pub fn point(id: ModelId, rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let n_lo = if id == ModelId::RiPysr { 7 } else { 2 };
    (rng.gen_range(12.0..32.0), rng.gen_range(n_lo..=16) as f64, rng.gen_range(1.5..3.5))
}
