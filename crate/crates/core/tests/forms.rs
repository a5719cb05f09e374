use finite_part::grassmann::{eval_form, sample_points, FormField, MultiVector};
use num_complex::Complex64;

fn fs_power(z: &[Complex64], k: usize) -> MultiVector {
    let fs = eval_form(FormField::FubiniStudy, z).unwrap();
    (0..k).fold(MultiVector::scalar(z.len(), Complex64::new(1.0, 0.0)), |acc, _| acc.wedge(&fs).unwrap())
}

#[test]
fn mixed_pair_traces_against_fubini_study() {
    for d in 1..=3 {
        for z in sample_points(d, 20, 7 + d as u64) {
            let top = fs_power(&z, d).density();
            let lower = fs_power(&z, d - 1);
            for a in 0..=d {
                for b in 0..=d {
                    if a == b {
                        continue;
                    }
                    let pair = eval_form(FormField::MixedLogPair(a, b), &z).unwrap();
                    let v = lower.wedge(&pair).unwrap().density();
                    let expected = -top / d as f64;
                    assert!((v - expected).norm() <= 1e-10 * expected.norm(), "d={d} ({a},{b})");
                }
            }
        }
    }
}

#[test]
fn fubini_study_top_density() {
    // ω_FS^d = d!/(1+|z|²)^{d+1} times the Euclidean volume
    for d in 1..=3 {
        for z in sample_points(d, 10, 3) {
            let s = 1.0 + z.iter().map(|c| c.norm_sqr()).sum::<f64>();
            let fact: f64 = (1..=d).map(|k| k as f64).product();
            let v = fs_power(&z, d).density();
            assert!((v.re - fact / s.powi(d as i32 + 1)).abs() < 1e-12 * v.re);
            assert!(v.im.abs() < 1e-12 * v.re);
        }
    }
}
