use meissner::boundary_layer::profile::{e_profile, CutoffProfile};
use meissner::geometry::{build_surface, sample_grid, Curve, SurfaceParams};
use meissner::harness::{fit_slope, preset, Bound, RunConfig, RunManifest};
use meissner::model_problems::bessel::{bessel_j, bessel_zeros};
use meissner::model_problems::london::LondonSphere;
use meissner::Vec3;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cutoff_is_a_bounded_bump(r0 in 0.01f64..1.0, s in -3.0f64..3.0) {
        let c = CutoffProfile::new(r0);
        let p = c.psi(s * r0);
        prop_assert!((0.0..=1.0).contains(&p.v));
        // quintic smoothstep: |psi'| <= 15 / (8 r0)
        prop_assert!(p.d.abs() <= 15.0 / (8.0 * r0) + 1e-12);
        if s.abs() >= 2.0 { prop_assert_eq!(p.v, 0.0); }
        if s.abs() <= 1.0 { prop_assert_eq!(p.v, 1.0); }
    }

    #[test]
    fn e_profile_is_monotone_and_bounded(r0 in 0.05f64..0.5, lam in 1e-3f64..0.2, a in -2.5f64..0.0, b in -2.5f64..0.0) {
        let c = CutoffProfile::new(r0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (el, eh) = (e_profile(lo * r0, lam, &c), e_profile(hi * r0, lam, &c));
        prop_assert!(el >= 0.0 && eh >= el - 1e-15);
        // E(r) <= lambda exp(r / lambda) since psi <= 1
        prop_assert!(eh <= lam * (hi * r0 / lam).exp() * (1.0 + 1e-12));
        if lo <= -2.0 { prop_assert_eq!(el, 0.0); }
    }

    #[test]
    fn bessel_zeros_are_ordered_roots(m in 0usize..30, count in 1usize..40) {
        let z = bessel_zeros(m, count).unwrap();
        prop_assert!(z[0] > m as f64);
        for w in z.windows(2) { prop_assert!(w[1] > w[0]); }
        for k in &z { prop_assert!(bessel_j(m, *k).abs() < 1e-12); }
    }

    #[test]
    fn slope_fit_recovers_power_laws(p in -3.0f64..3.0, c in 0.01f64..100.0, n in 4usize..12) {
        let pairs: Vec<(f64, f64)> = (0..n).map(|k| { let x = 0.5f64.powi(k as i32); (x, c * x.powf(p)) }).collect();
        let fit = fit_slope(&pairs).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-9);
        prop_assert!(fit.r2 > 1.0 - 1e-10);
    }

    #[test]
    fn manifest_verdicts_survive_json(vals in prop::collection::vec((-10.0f64..10.0, 0usize..5, -5.0f64..5.0), 1..12)) {
        let mut m = RunManifest::new(preset("london_sphere").unwrap(), 1);
        for (i, (v, kind, lim)) in vals.iter().enumerate() {
            let bound = match kind {
                0 => Bound::Below { limit: *lim },
                1 => Bound::Above { limit: *lim },
                2 => Bound::AtLeast { limit: *lim },
                3 => Bound::Within { target: *lim, tol: 1.0 },
                _ => Bound::Holds,
            };
            m.check(&format!("c{i}"), *v, bound);
        }
        prop_assert_eq!(m.reevaluate(), m.passed());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        m.write(&path).unwrap();
        let back = RunManifest::read(&path).unwrap();
        prop_assert_eq!(back.reevaluate(), m.passed());
        prop_assert_eq!(&back, &m);
    }

    #[test]
    fn torus_grid_normals_are_unit_and_outward(big in 1.5f64..4.0, frac in 0.1f64..0.6, hu in 4usize..12, hv in 4usize..12) {
        let small = big * frac;
        let s = build_surface("torus_rev", &SurfaceParams { major: Some(big), minor: Some(small), ..Default::default() }).unwrap();
        let g = sample_grid(&s, 2 * hu, 2 * hv).unwrap();
        for nd in &g.nodes {
            prop_assert!((nd.n.norm() - 1.0).abs() < 1e-12);
            let x = nd.x();
            let core = Vec3::new(x.x, x.y, 0.0).normalize() * big;
            prop_assert!(nd.n.dot(&(x - core)) > 0.0);
        }
        let area = 4.0 * std::f64::consts::PI.powi(2) * big * small;
        prop_assert!((g.weights().iter().sum::<f64>() - area).abs() < 1e-10 * area);
    }

    #[test]
    fn circles_close(r in 0.1f64..5.0, z in -2.0f64..2.0) {
        prop_assert!(Curve::circle_z(r, z).closure_gap() < 1e-12);
    }

    #[test]
    fn london_sphere_is_continuous(radius in 0.5f64..3.0, t in 0.01f64..1.0, b0 in 0.1f64..2.0, neg in any::<bool>(), th in 0.05f64..3.1, ph in 0.0f64..std::f64::consts::TAU) {
        let b0 = if neg { -b0 } else { b0 };
        let ls = LondonSphere::new(radius, t * radius, b0).unwrap();
        let n = Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
        let (inner, outer) = ls.one_sided(n * radius);
        let scale = b0.abs();
        prop_assert!((inner - outer).norm() <= 1e-10 * scale);
    }

    #[test]
    fn config_round_trips(name_idx in 0usize..13, seed in any::<u64>()) {
        let names = meissner::harness::PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>();
        let mut cfg = preset(names[name_idx % names.len()]).unwrap();
        cfg.seed = seed;
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
