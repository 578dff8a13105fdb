use crate::error::Result;
use crate::field::ScalarField3D;
use crate::observe::{apply_interpolant, InterpolantSpec, ModalBasis};

/// `-μ (I_h(η) - I_h(T̃_obs))`, evaluated as `-μ I_h(η - T̃_obs)` by
/// linearity of `I_h`; exactly zero when `η = T̃_obs`.
pub fn nudging_tendency(
    eta: &ScalarField3D,
    t_obs: &ScalarField3D,
    spec: &InterpolantSpec,
    basis: Option<&ModalBasis>,
    mu: f64,
) -> Result<ScalarField3D> {
    eta.check_same_grid(t_obs)?;
    if mu == 0.0 {
        return Ok(ScalarField3D::zeros(eta.domain));
    }
    let obs = apply_interpolant(&eta.sub(t_obs), spec, basis)?;
    Ok(obs.scaled(-mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{inner, DomainSpec, PhysParams};
    use crate::observe::{build_modal_basis, InterpolantKind, SmoothSampler};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (DomainSpec, PhysParams, InterpolantSpec, ModalBasis, SmoothSampler) {
        let d = DomainSpec::unit(8, 8, 6);
        let p = PhysParams::default();
        let spec = InterpolantSpec {
            kind: InterpolantKind::Modal,
            h: 0.25,
            c0: None,
        };
        let basis = build_modal_basis(d, &p, spec.h).unwrap();
        let sampler = SmoothSampler::new(d, &p).unwrap();
        (d, p, spec, basis, sampler)
    }

    #[test]
    fn synchronized_states_get_no_nudge() {
        let (_, _, spec, basis, sampler) = setup();
        let f = sampler.draw(&mut ChaCha8Rng::seed_from_u64(1), None);
        let n = nudging_tendency(&f, &f, &spec, Some(&basis), 30.0).unwrap();
        assert_eq!(n.max_abs(), 0.0);
    }

    #[test]
    fn zero_relaxation_gives_zero() {
        let (_, _, spec, basis, sampler) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, b) = (sampler.draw(&mut rng, None), sampler.draw(&mut rng, None));
        let n = nudging_tendency(&a, &b, &spec, Some(&basis), 0.0).unwrap();
        assert_eq!(n.max_abs(), 0.0);
    }

    #[test]
    fn matches_difference_of_observations() {
        let (_, _, spec, basis, sampler) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b) = (sampler.draw(&mut rng, None), sampler.draw(&mut rng, None));
        let mu = 7.5;
        let n = nudging_tendency(&a, &b, &spec, Some(&basis), mu).unwrap();
        let ia = apply_interpolant(&a, &spec, Some(&basis)).unwrap();
        let ib = apply_interpolant(&b, &spec, Some(&basis)).unwrap();
        let expect = ia.sub(&ib).scaled(-mu);
        assert!(n.sub(&expect).max_abs() <= 1e-12 * expect.max_abs());
    }

    #[test]
    fn orthogonal_to_unobserved_complement() {
        let (_, _, spec, basis, sampler) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (a, b, g) = (
            sampler.draw(&mut rng, None),
            sampler.draw(&mut rng, None),
            sampler.draw(&mut rng, None),
        );
        let g = g.sub(&apply_interpolant(&g, &spec, Some(&basis)).unwrap());
        let n = nudging_tendency(&a, &b, &spec, Some(&basis), 10.0).unwrap();
        let scale = crate::field::l2_norm(&n).unwrap() * crate::field::l2_norm(&g).unwrap();
        assert!(inner(&n, &g).abs() <= 1e-10 * scale);
    }
}
