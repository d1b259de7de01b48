use imbal_core::glm::{
    fit_glm, glm_log_likelihood, glm_log_likelihood_derivatives, BinaryDataset, GlmObjective, RawCoefficients,
};
use imbal_core::optim::Objective;
use imbal_core::{Error, LinkFamily};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONCAVE: [LinkFamily; 3] = [LinkFamily::Logistic, LinkFamily::Normal, LinkFamily::GumbelMin];
const ALL: [LinkFamily; 6] = [
    LinkFamily::Logistic,
    LinkFamily::Normal,
    LinkFamily::GumbelMin,
    LinkFamily::Cauchy,
    LinkFamily::TLogistic(0.5),
    LinkFamily::TLogistic(1.5),
];

/// Random dataset from the model itself with standard-normal-ish covariates.
fn simulate(seed: u64, m: usize, p: usize, a: f64, family: LinkFamily) -> BinaryDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let x: Vec<f64> = (0..p).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let eta = a + x.iter().sum::<f64>() * 0.7;
        labels.push(rng.random::<f64>() < family.cdf(eta));
        rows.push(x);
    }
    BinaryDataset::new(rows, labels).unwrap()
}

/// `|a - b| / max(|a|, |b|, 1)`: relative for large values, absolute near zero.
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn concave_families_converge(seed in 0u64..1_000_000, m in 30usize..2_000, p in 1usize..=3, fam in 0usize..3) {
        let family = CONCAVE[fam];
        let data = simulate(seed, m, p, -0.5, family);
        match fit_glm(&data, &family, None) {
            Ok(fit) => {
                prop_assert!(fit.converged);
                prop_assert!(fit.gradient_norm <= 1e-8, "gradient {}", fit.gradient_norm);
            }
            // tiny samples can be separated or single-class; that is reported, not a failure
            Err(Error::PerfectSeparation { .. }) | Err(Error::SingleClass { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn affine_reparameterization_invariance(seed in 0u64..1_000_000, fam in 0usize..3) {
        let family = CONCAVE[fam];
        let data = simulate(seed, 300, 1, 0.0, family);
        let Ok(fit) = fit_glm(&data, &family, None) else { return Ok(()); };
        let shifted = BinaryDataset::new(
            data.rows().map(|r| vec![2.0 * r[0] + 1.0]).collect(),
            data.labels().to_vec(),
        ).unwrap();
        let fit2 = fit_glm(&shifted, &family, None).unwrap();
        prop_assert!((fit.log_likelihood - fit2.log_likelihood).abs() <= 1e-9);
        // b' = b/2, a' = a - b/2
        let b = fit.coefficients.b[0];
        prop_assert!((fit2.coefficients.b[0] - b / 2.0).abs() <= 1e-6 * b.abs().max(1.0));
        prop_assert!((fit2.coefficients.a - (fit.coefficients.a - b / 2.0)).abs() <= 1e-6 * b.abs().max(1.0));
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for family in ALL {
        let data = simulate(7, 60, 2, -1.0, LinkFamily::Logistic);
        let mut checked = 0;
        while checked < 50 {
            let params: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let coef = RawCoefficients::from_params(&params);
            // bounded-support families: only points with a finite likelihood
            if !glm_log_likelihood(&data, &family, &coef).is_finite() {
                continue;
            }
            checked += 1;
            let (_, grad, hess) = glm_log_likelihood_derivatives(&data, &family, &coef);
            let value_at = |p: &[f64]| glm_log_likelihood(&data, &family, &RawCoefficients::from_params(p));
            let grad_at = |p: &[f64]| glm_log_likelihood_derivatives(&data, &family, &RawCoefficients::from_params(p)).1;
            for k in 0..3 {
                let fd = richardson(|h| {
                    let (up, dn) = shifted(&params, k, h);
                    (value_at(&up) - value_at(&dn)) / (2.0 * h)
                });
                assert!(rel_err(grad[k], fd) <= 1e-6, "{family} grad[{k}] {} vs {fd}", grad[k]);
                for l in 0..3 {
                    let fd2 = richardson(|h| {
                        let (up, dn) = shifted(&params, k, h);
                        (grad_at(&up)[l] - grad_at(&dn)[l]) / (2.0 * h)
                    });
                    assert!(rel_err(hess[(l, k)], fd2) <= 1e-4, "{family} hess[{l},{k}] {} vs {fd2}", hess[(l, k)]);
                }
            }
        }
    }
}

fn shifted(p: &[f64], k: usize, h: f64) -> (Vec<f64>, Vec<f64>) {
    let mut up = p.to_vec();
    let mut dn = p.to_vec();
    up[k] += h;
    dn[k] -= h;
    (up, dn)
}

/// Central difference with one Richardson step, removing the O(h^2) term.
fn richardson(d: impl Fn(f64) -> f64) -> f64 {
    let h = 1e-5;
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

#[test]
fn penalized_uniform_link_stays_interior() {
    // the uniform link has G = 0 or 1 outside [-1, 1]; with kappa > 0 every
    // row enters log G, so the fit must keep all linear predictors in (-1, 1)
    let data = simulate(3, 200, 1, 0.0, LinkFamily::Uniform);
    let fit = fit_glm(&data, &LinkFamily::Uniform, Some(0.5)).unwrap();
    assert!(fit.converged);
    for (row, &y) in data.rows().zip(data.labels()) {
        let eta = fit.coefficients.linear_predictor(row);
        assert!(eta > -1.0, "log G must stay finite: eta = {eta}");
        if !y {
            assert!(eta < 1.0, "log(1 - G) must stay finite: eta = {eta}");
        }
    }
    let obj = GlmObjective::new(&data, LinkFamily::Uniform, 0.5);
    assert!(obj.value(&[5.0, 0.0]).is_infinite());
}

#[test]
fn penalty_restores_existence_under_separation() {
    let data = BinaryDataset::new(
        (0..20).map(|i| vec![i as f64]).collect(),
        (0..20).map(|i| i >= 17).collect(),
    )
    .unwrap();
    assert!(matches!(fit_glm(&data, &LinkFamily::Logistic, None), Err(Error::PerfectSeparation { .. })));
    let fit = fit_glm(&data, &LinkFamily::Logistic, Some(1.0)).unwrap();
    assert!(fit.converged);
    assert!(fit.coefficients.b[0].is_finite());
}

#[test]
fn normalized_coefficients_round_trip() {
    let data = simulate(11, 500, 2, -2.0, LinkFamily::Cauchy);
    let fit = fit_glm(&data, &LinkFamily::Cauchy, None).unwrap();
    let m = data.len() as u64;
    let n = fit.normalized(m).unwrap();
    let t = imbal_core::deformed::normalizing_sequence(&LinkFamily::Cauchy, m).unwrap();
    let back = imbal_core::glm::denormalize_coefficients(&n, &t);
    assert!((back.a - fit.coefficients.a).abs() < 1e-9);
    for (x, y) in back.b.iter().zip(&fit.coefficients.b) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn fits_are_reproducible() {
    let data = simulate(5, 400, 2, -1.0, LinkFamily::TLogistic(1.5));
    let a = fit_glm(&data, &LinkFamily::TLogistic(1.5), None).unwrap();
    let b = fit_glm(&data, &LinkFamily::TLogistic(1.5), None).unwrap();
    assert_eq!(a, b);
}
