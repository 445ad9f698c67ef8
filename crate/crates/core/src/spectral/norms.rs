use num_complex::Complex64;

use super::{ModeField, SpectralModel};
use crate::error::{Error, Result};

/// Largest exponent (natural-log scale) accepted in a Gevrey weight.
pub const GEVREY_EXPONENT_CAP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GevreySign {
    /// `e^{+A π^{1/s}}`: the Gevrey function norm.
    Plus,
    /// `e^{-A π^{1/s}}`: the ultradistribution pairing norm.
    Minus,
}

/// `(Σ_m μ_m (1 + π_m²)^{2s/ν} |u_m|²)^{1/2}`.
pub fn sobolev_norm(u: &ModeField, model: &SpectralModel, s: f64) -> Result<f64> {
    u.check(model)?;
    Ok(sobolev_norm_unchecked(&u.0, model, s))
}

pub(crate) fn sobolev_norm_unchecked(u: &[Complex64], model: &SpectralModel, s: f64) -> f64 {
    let p = 2.0 * s / model.nu;
    u.iter()
        .zip(model.frequencies())
        .zip(model.weights())
        .map(|((z, pi), mu)| mu * (1.0 + pi * pi).powf(p) * z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `(Σ_m μ_m e^{±2A π_m^{1/s}} |u_m|²)^{1/2}`.
pub fn gevrey_norm(u: &ModeField, model: &SpectralModel, s: f64, a: f64, sign: GevreySign) -> Result<f64> {
    u.check(model)?;
    if s < 1.0 {
        return Err(Error::Domain(format!("Gevrey order s = {s} must be at least 1")));
    }
    gevrey_norm_unchecked(&u.0, model, s, a, sign)
}

pub(crate) fn gevrey_norm_unchecked(
    u: &[Complex64],
    model: &SpectralModel,
    s: f64,
    a: f64,
    sign: GevreySign,
) -> Result<f64> {
    let sgn = match sign {
        GevreySign::Plus => 1.0,
        GevreySign::Minus => -1.0,
    };
    let mut acc = 0.0;
    for (m, ((z, pi), mu)) in u.iter().zip(model.frequencies()).zip(model.weights()).enumerate() {
        let exponent = sgn * 2.0 * a * pi.powf(1.0 / s);
        if exponent > GEVREY_EXPONENT_CAP {
            return Err(Error::Overflow {
                mode: m + 1,
                exponent,
                cap: GEVREY_EXPONENT_CAP,
            });
        }
        acc += mu * exponent.exp() * z.norm_sqr();
    }
    Ok(acc.sqrt())
}

/// `Σ_m μ_m q_m` for nonnegative per-mode squared quantities `q`.
pub fn plancherel_assemble(per_mode_sq: &[f64], model: &SpectralModel) -> Result<f64> {
    if per_mode_sq.len() != model.len() {
        return Err(Error::Mismatch(format!(
            "{} per-mode values for a {}-mode model",
            per_mode_sq.len(),
            model.len()
        )));
    }
    let negatives: Vec<String> = per_mode_sq
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_nan() || **v < 0.0)
        .map(|(i, v)| format!("entry {} = {v} is negative", i + 1))
        .collect();
    if !negatives.is_empty() {
        return Err(Error::Validation(negatives));
    }
    Ok(per_mode_sq.iter().zip(model.weights()).map(|(q, mu)| q * mu).sum())
}

#[cfg(test)]
mod tests {
    use super::super::{build_model, ModelSpec};
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(seed: u64, m: usize) -> ModeField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ModeField((0..m).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
    }

    fn eight_mode_model() -> SpectralModel {
        let entries: Vec<(f64, f64)> = (1..=8).map(|m| (0.7 * m as f64 + 0.1, 0.3 + 0.1 * m as f64)).collect();
        SpectralModel::from_table(&entries, 3.0).unwrap()
    }

    #[test]
    fn single_mode_values() {
        let m = SpectralModel::from_table(&[(2.0, 1.0)], 2.0).unwrap();
        let u = ModeField::from_real([1.0]);
        assert!((sobolev_norm(&u, &m, 2.0).unwrap() - 5.0).abs() < 1e-14);
        let m2 = SpectralModel::from_table(&[(1.0, 1.0), (2.0, 1.0)], 2.0).unwrap();
        let u2 = ModeField::from_real([1.0, 1.0]);
        assert!((sobolev_norm(&u2, &m2, 0.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);

        let m8 = SpectralModel::from_table(&[(8.0, 1.0)], 2.0).unwrap();
        let g = gevrey_norm(&ModeField::from_real([0.5]), &m8, 1.0, 2f64.ln(), GevreySign::Plus).unwrap();
        assert!((g - 256.0 * 0.5).abs() < 1e-10);
    }

    #[test]
    fn direct_summation_oracle() {
        // Oracle: explicit per-entry arithmetic written independently.
        let model = eight_mode_model();
        let u = random_field(7, 8);
        let mut sob = 0.0;
        let mut gev = 0.0;
        for i in 0..8 {
            let pi = model.frequencies()[i];
            let mu = model.weights()[i];
            let z2 = u.0[i].re * u.0[i].re + u.0[i].im * u.0[i].im;
            sob += mu * (1.0 + pi * pi).powf(2.0 / 3.0) * z2;
            gev += mu * (2.0 * 0.4 * pi.powf(1.0 / 1.5)).exp() * z2;
        }
        let s = sobolev_norm(&u, &model, 1.0).unwrap();
        assert!((s - sob.sqrt()).abs() <= 1e-14 * s);
        let g = gevrey_norm(&u, &model, 1.5, 0.4, GevreySign::Plus).unwrap();
        assert!((g - gev.sqrt()).abs() <= 1e-14 * g);
    }

    #[test]
    fn gevrey_with_zero_a_is_l2() {
        let model = eight_mode_model();
        let u = random_field(3, 8);
        let g = gevrey_norm(&u, &model, 2.0, 0.0, GevreySign::Minus).unwrap();
        let s = sobolev_norm(&u, &model, 0.0).unwrap();
        assert!((g - s).abs() < 1e-15);
    }

    #[test]
    fn overflow_names_mode() {
        let model = build_model(&ModelSpec::Power { modes: 10, nu: 2.0 }).unwrap();
        let u = ModeField::from_real(vec![1.0; 10]);
        match gevrey_norm(&u, &model, 1.0, 40.0, GevreySign::Plus) {
            Err(Error::Overflow { mode, .. }) => assert_eq!(mode, 9),
            other => panic!("{other:?}"),
        }
        assert!(gevrey_norm(&u, &model, 1.0, 40.0, GevreySign::Minus).is_ok());
    }

    #[test]
    fn plancherel_cases() {
        let m = SpectralModel::from_table(&[(1.0, 2.0), (2.0, 3.0)], 2.0).unwrap();
        assert_eq!(plancherel_assemble(&[0.0, 0.0], &m).unwrap(), 0.0);
        assert_eq!(plancherel_assemble(&[1.0, 1.0], &m).unwrap(), 5.0);
        assert!(plancherel_assemble(&[1.0, -1.0], &m).is_err());

        let model = eight_mode_model();
        let u = random_field(11, 8);
        let s = 0.75;
        let q: Vec<f64> = u
            .0
            .iter()
            .zip(model.frequencies())
            .map(|(z, pi)| z.norm_sqr() * (1.0 + pi * pi).powf(2.0 * s / model.nu))
            .collect();
        let assembled = plancherel_assemble(&q, &model).unwrap();
        let sob = sobolev_norm(&u, &model, s).unwrap();
        assert!((assembled - sob * sob).abs() <= 1e-14 * assembled);
        let q0: Vec<f64> = u.0.iter().map(|z| z.norm_sqr()).collect();
        let l2 = sobolev_norm(&u, &model, 0.0).unwrap();
        assert!((plancherel_assemble(&q0, &model).unwrap().sqrt() - l2).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn norms_are_homogeneous(seed in 0u64..1000, re in -3.0f64..3.0, im in -3.0f64..3.0, s in -1.0f64..2.0) {
            let model = eight_mode_model();
            let u = random_field(seed, 8);
            let alpha = Complex64::new(re, im);
            let scaled = u.scaled(alpha);
            let a = sobolev_norm(&scaled, &model, s).unwrap();
            let b = alpha.norm() * sobolev_norm(&u, &model, s).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * b.max(1e-300) * 4.0);
            let a = gevrey_norm(&scaled, &model, 1.5, 0.3, GevreySign::Minus).unwrap();
            let b = alpha.norm() * gevrey_norm(&u, &model, 1.5, 0.3, GevreySign::Minus).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * b.max(1e-300) * 4.0);
        }

        #[test]
        fn norms_are_monotone(seed in 0u64..1000, s in -2.0f64..2.0, ds in 0.0f64..1.0, a in 0.0f64..1.0, da in 0.0f64..1.0) {
            let model = eight_mode_model();
            let u = random_field(seed, 8);
            prop_assert!(sobolev_norm(&u, &model, s + ds).unwrap() >= sobolev_norm(&u, &model, s).unwrap());
            prop_assert!(
                gevrey_norm(&u, &model, 1.2, a + da, GevreySign::Plus).unwrap()
                    >= gevrey_norm(&u, &model, 1.2, a, GevreySign::Plus).unwrap()
            );
        }
    }
}
