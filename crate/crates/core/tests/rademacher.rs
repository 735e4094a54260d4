mod common;

use common::{oracle, rng};
use rand::Rng;
use xordisc::{Dyadic, Exponent, RademacherPolynomial};

fn random_table(r: &mut impl Rng, k: usize, s: u32) -> Vec<i64> {
    let len = (s as usize + 1).pow(k as u32);
    let sparse = r.gen_bool(0.3);
    (0..len).map(|_| if sparse && r.gen_bool(0.7) { 0 } else { r.gen_range(-40..=40) }).collect()
}

#[test]
fn grid_values_match_term_by_term() {
    let mut r = rng(41);
    for (k, s) in [(1, 1), (1, 5), (2, 2), (2, 4), (3, 2)] {
        let c = random_table(&mut r, k, s);
        let p = RademacherPolynomial::new(k, s, 0, c.iter().map(|&v| v as i128).collect()).unwrap();
        let want = oracle::rademacher_values(k, s, &c);
        let got: Vec<i64> = p.grid_values().unwrap().into_iter().map(|v| v as i64).collect();
        assert_eq!(got, want);
        for (i, a) in oracle::level_vectors(k, s).iter().enumerate() {
            assert_eq!(&p.levels_of(i), a);
        }
    }
}

#[test]
fn khinchin_against_direct_norms() {
    let mut r = rng(42);
    for _ in 0..60 {
        let k = r.gen_range(1..=2);
        let s = r.gen_range(1..=5);
        let c = random_table(&mut r, k, s);
        let p = RademacherPolynomial::new(k, s, 0, c.iter().map(|&v| v as i128).collect()).unwrap();
        let vals = oracle::rademacher_values(k, s, &c);
        let q2 = (c.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt();
        for q in [1.0, 2.0, 4.0] {
            let norm = (vals.iter().map(|&v| (v.abs() as f64).powf(q)).sum::<f64>() / vals.len() as f64).powf(1.0 / q);
            let rep = p.khinchin_check(q).unwrap();
            assert!((rep.norm - norm).abs() <= 1e-12 * norm.max(1.0));
            let alpha: f64 = if q < 2.0 { 2f64.powf(-(2.0 - q) / q) } else { 1.0 };
            let beta = (q / 2.0).ceil().sqrt();
            assert!(alpha.powi(k as i32) * q2 <= norm * (1.0 + 1e-12));
            assert!(norm <= beta.powi(k as i32) * q2 * (1.0 + 1e-12));
            assert!(rep.lower_ok && rep.upper_ok);
        }
        assert_eq!(p.norm_grid(Exponent::Infinity).unwrap(), vals.iter().map(|v| v.abs()).max().unwrap() as f64);
    }
}

#[test]
fn one_dimensional_sup_is_l1_of_coefficients() {
    let mut r = rng(43);
    for _ in 0..100 {
        let s = r.gen_range(0..=8);
        let c = random_table(&mut r, 1, s);
        let p = RademacherPolynomial::new(1, s, 3, c.iter().map(|&v| v as i128).collect()).unwrap();
        let l1: i64 = c.iter().map(|v| v.abs()).sum();
        assert_eq!(p.sup_norm().unwrap(), Dyadic::new(l1, 3));
    }
}

#[test]
fn rademacher_system_is_orthonormal() {
    for (k, s) in [(1, 6), (2, 3), (3, 2)] {
        let basis: Vec<Vec<i64>> = oracle::level_vectors(k, s)
            .iter()
            .map(|a| {
                let p = RademacherPolynomial::single(k, s, a, 1).unwrap();
                p.grid_values().unwrap().into_iter().map(|v| v as i64).collect()
            })
            .collect();
        let g = 1i64 << (k as u32 * s);
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate() {
                let dot: i64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                assert_eq!(dot, if i == j { g } else { 0 });
            }
        }
    }
}
