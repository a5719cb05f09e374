use finite_part::gamma::{closed_form_fp, default_trunc};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Lanczos approximation (g = 7) of Γ(z) for Re z ≥ 1/2.
fn gamma_c(z: Complex64) -> Complex64 {
    const P: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let z = z - 1.0;
    let mut x = Complex64::new(P[0], 0.0);
    for (i, p) in P.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + 7.5;
    ((z + 0.5) * t.ln() - t).exp() * x * (2.0 * PI).sqrt()
}

/// Taylor coefficients of (n+1)Γ(1+λ)^{n+1}/Γ(1+(n+1)λ) by a Cauchy integral.
fn cauchy_coefficients(n: usize, count: usize) -> Vec<f64> {
    let r = 0.4 / (n + 1) as f64;
    let m = 128;
    (0..count)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                let theta = 2.0 * PI * j as f64 / m as f64;
                let lambda = Complex64::from_polar(r, theta);
                let one = Complex64::new(1.0, 0.0);
                let f = (n + 1) as f64 * gamma_c(one + lambda).powi(n as i32 + 1)
                    / gamma_c(one + lambda * (n + 1) as f64);
                acc += f * Complex64::from_polar(1.0, -theta * k as f64);
            }
            acc.re / m as f64 / r.powi(k as i32)
        })
        .collect()
}

#[test]
fn series_coefficients_match_complex_gamma_oracle() {
    for n in 1..=5u32 {
        let cf = closed_form_fp(n, default_trunc(n)).unwrap();
        let series = cf.series.eval();
        let oracle = cauchy_coefficients(n as usize, n as usize + 2);
        for (k, expected) in oracle.iter().enumerate() {
            let got = series.coeff(k as i32).unwrap();
            assert!(
                (got - expected).abs() <= 1e-8 * expected.abs().max(1.0),
                "n={n} k={k}: {got} vs {expected}"
            );
        }
        let fp = PI.powi(n as i32) * oracle[n as usize];
        assert!((cf.fp.eval() - fp).abs() <= 1e-8 * fp.abs().max(1.0));
    }
}

#[test]
fn closed_form_strings() {
    let expected = [
        (2, "-9*pi^2*zeta(2)"),
        (3, "80*pi^3*zeta(3)"),
        (4, "-150*pi^4*zeta(4)"),
        (5, "-6300*pi^5*zeta(2)*zeta(3) + 9324*pi^5*zeta(5)"),
    ];
    for (n, s) in expected {
        assert_eq!(closed_form_fp(n, default_trunc(n)).unwrap().fp.to_string(), s);
    }
}
