use cvmaps::cutmap::{cut, projector_cut, CutSpec};
use cvmaps::densmat::{
    hermitian_eigenvalues, partial_trace, partial_transpose, relative_asymmetry, transpose_subsystem, ComplexMatrix,
    DensityMatrix, Mode, Structure,
};
use cvmaps::discretizer::{discretize, GridSpec};
use cvmaps::gaussian_state::{eta_at, AmplifierParams, SqueezeParams, TwoModeGaussian};
use cvmaps::measures::{analytic_measure, linear_entropy, tsallis_entropy, von_neumann_entropy, MeasureKind};
use cvmaps::Complex64;
use proptest::prelude::*;

fn entries(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0_f64, -1.0..1.0_f64), len)
}

fn gram(dim: usize, rank: usize, z: &[(f64, f64)]) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(dim, rank, |i, j| {
        let (re, im) = z[i * rank + j];
        Complex64::new(re, im)
    });
    let g = &a * a.adjoint();
    let mut m = ComplexMatrix::from_fn(dim, dim, |i, j| if i >= j { g[(i, j)] } else { g[(j, i)].conj() });
    for i in 0..dim {
        m[(i, i)].im = 0.0;
    }
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    m.map(|v| v / tr)
}

fn density(dim: usize) -> impl Strategy<Value = DensityMatrix> {
    (1..=dim)
        .prop_flat_map(move |rank| entries(dim * rank).prop_map(move |z| (rank, z)))
        .prop_filter_map("degenerate", move |(rank, z)| DensityMatrix::single_mode(gram(dim, rank, &z)).ok())
}

fn bipartite() -> impl Strategy<Value = DensityMatrix> {
    (2..=4usize, 2..=4usize).prop_flat_map(|(n1, n2)| {
        density(n1 * n2).prop_map(move |r| DensityMatrix::bipartite(r.into_matrix(), n1, n2).unwrap())
    })
}

fn cut_case() -> impl Strategy<Value = (DensityMatrix, CutSpec)> {
    (3..=10usize).prop_flat_map(|dim| {
        (density(dim), prop::collection::btree_set(0..dim, 1..dim))
            .prop_map(move |(rho, removed)| (rho, CutSpec::new(dim, removed).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_gives_a_state(rho in bipartite()) {
        for keep in [Mode::First, Mode::Second] {
            let r = partial_trace(&rho, keep).unwrap();
            prop_assert!(relative_asymmetry(r.matrix()) <= 1e-12);
            prop_assert!((r.trace() - 1.0).abs() <= 1e-12);
            prop_assert!(hermitian_eigenvalues(r.matrix()).unwrap().min() >= -1e-12);
        }
    }

    #[test]
    fn partial_trace_respects_mixing(a in bipartite(), p in 0.0..=1.0_f64) {
        let Structure::Bipartite(n1, n2) = a.structure() else { unreachable!() };
        let b = DensityMatrix::maximally_mixed(n1 * n2);
        let b = DensityMatrix::bipartite(b.into_matrix(), n1, n2).unwrap();
        let mix = DensityMatrix::bipartite(a.matrix() * Complex64::from(p) + b.matrix() * Complex64::from(1.0 - p), n1, n2).unwrap();
        let lhs = partial_trace(&mix, Mode::First).unwrap();
        let rhs = partial_trace(&a, Mode::First).unwrap().into_matrix() * Complex64::from(p)
            + partial_trace(&b, Mode::First).unwrap().into_matrix() * Complex64::from(1.0 - p);
        prop_assert!((lhs.matrix() - rhs).camax() <= 1e-14);
    }

    #[test]
    fn partial_transpose_is_an_involution(rho in bipartite()) {
        let Structure::Bipartite(n1, n2) = rho.structure() else { unreachable!() };
        for mode in [Mode::First, Mode::Second] {
            let once = partial_transpose(&rho, mode).unwrap();
            let twice = transpose_subsystem(&once, n1, n2, mode).unwrap();
            prop_assert_eq!(&twice, rho.matrix());
        }
        // transposing both subsystems is the full transpose
        let both = transpose_subsystem(&partial_transpose(&rho, Mode::First).unwrap(), n1, n2, Mode::Second).unwrap();
        prop_assert_eq!(both, rho.matrix().transpose());
    }

    #[test]
    fn pure_state_reductions_share_a_spectrum(n1 in 2..=5usize, n2 in 2..=5usize, z in entries(25)) {
        let psi: Vec<Complex64> = z[..n1 * n2].iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        prop_assume!(psi.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-3);
        let rho = DensityMatrix::from_pure_state(&psi, Structure::Bipartite(n1, n2)).unwrap();
        let a = partial_trace(&rho, Mode::First).unwrap().spectrum();
        let b = partial_trace(&rho, Mode::Second).unwrap().spectrum();
        prop_assert!((von_neumann_entropy(&a) - von_neumann_entropy(&b)).abs() <= 1e-10);
        prop_assert!((linear_entropy(&a) - linear_entropy(&b)).abs() <= 1e-12);
        let (mut ea, mut eb) = (a.clamped(), b.clamped());
        ea.retain(|&v| v > 1e-10);
        eb.retain(|&v| v > 1e-10);
        prop_assert_eq!(ea.len(), eb.len());
        for (x, y) in ea.iter().zip(&eb) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn cuts_give_states((rho, spec) in cut_case()) {
        prop_assume!((0..rho.dim()).filter(|i| !spec.removed().contains(i)).map(|i| rho.matrix()[(i, i)].re).sum::<f64>() > 1e-6);
        for compact in [false, true] {
            let out = cut(&rho, &spec, compact).unwrap();
            prop_assert!(relative_asymmetry(out.matrix()) <= 1e-12);
            prop_assert!((out.trace() - 1.0).abs() <= 1e-12);
            prop_assert!(hermitian_eigenvalues(out.matrix()).unwrap().min() >= -1e-9);
        }
        let full = cut(&rho, &spec, false).unwrap();
        let projected = projector_cut(&rho, &spec).unwrap();
        prop_assert_eq!(full.matrix(), projected.matrix());
        let compact = cut(&rho, &spec, true).unwrap();
        prop_assert_eq!(compact.dim(), spec.keep_count());
        for &r in spec.removed() {
            prop_assert!(full.matrix().row(r).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn cutting_is_idempotent((rho, spec) in cut_case()) {
        prop_assume!((0..rho.dim()).filter(|i| !spec.removed().contains(i)).map(|i| rho.matrix()[(i, i)].re).sum::<f64>() > 1e-6);
        let once = cut(&rho, &spec, false).unwrap();
        let twice = cut(&once, &spec, false).unwrap();
        prop_assert!((once.matrix() - twice.matrix()).camax() <= 1e-15);
    }

    #[test]
    fn entropies_stay_in_range(rho in density(8), q in 1.1..6.0_f64) {
        let s = rho.spectrum();
        let d = rho.dim() as f64;
        let vn = von_neumann_entropy(&s);
        prop_assert!(vn >= -1e-12 && vn <= d.ln() + 1e-12);
        let lin = linear_entropy(&s);
        prop_assert!(lin >= -1e-12 && lin <= 1.0 - 1.0 / d + 1e-12);
        let ts = tsallis_entropy(&s, q).unwrap();
        prop_assert!(ts >= -1e-12 && ts <= (1.0 - d.powf(1.0 - q)) / (q - 1.0) + 1e-12);
        // linear entropy is the q = 2 Tsallis entropy
        prop_assert!((tsallis_entropy(&s, 2.0).unwrap() - lin).abs() <= 1e-12);
    }

    #[test]
    fn analytic_measures_grow_with_squeezing(x in 0.0..0.9_f64, dx in 1e-3..0.09_f64) {
        for kind in [MeasureKind::VonNeumann, MeasureKind::Linear, MeasureKind::Tsallis { q: 5.0 }, MeasureKind::LogNegativity] {
            let lo = analytic_measure(kind, x).unwrap();
            let hi = analytic_measure(kind, x + dx).unwrap();
            prop_assert!(hi > lo, "{kind:?} at {x}");
        }
    }

    #[test]
    fn eta_is_periodic_and_bounded(t in 0.0..5.0_f64, beta in 0.0..0.5_f64) {
        let params = AmplifierParams::reference();
        let squeeze = SqueezeParams::from_beta(Complex64::new(beta, 0.0)).unwrap();
        let e0 = eta_at(&params, &squeeze, t).unwrap().norm();
        let e1 = eta_at(&params, &squeeze, t + params.period()).unwrap().norm();
        prop_assert!(e0 < 1.0);
        prop_assert!((e0 - e1).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn discretizations_are_states(t in 0.0..0.78_f64, half in 1..=6usize, width in 2.0..8.0_f64) {
        let g = TwoModeGaussian::at(&AmplifierParams::reference(), &SqueezeParams::from_beta(Complex64::new(0.05, 0.0)).unwrap(), t).unwrap();
        let grid = GridSpec::symmetric(2 * half + 1, width).unwrap();
        let d = discretize(|a, b, c, e| g.kernel(a, b, c, e), &grid, 1e-8).unwrap();
        prop_assert!(d.rho.validate().is_ok());
        prop_assert!(relative_asymmetry(d.rho.matrix()) <= 1e-12);
        prop_assert!((d.rho.trace() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn power_of_two_scaling_is_exact(t in 0.0..0.78_f64, k in -8..=8i32) {
        let g = TwoModeGaussian::at(&AmplifierParams::reference(), &SqueezeParams::from_beta(Complex64::new(0.05, 0.0)).unwrap(), t).unwrap();
        let grid = GridSpec::symmetric(7, 4.0).unwrap();
        let lambda = 2.0_f64.powi(k);
        let a = discretize(|x, y, u, v| g.kernel(x, y, u, v), &grid, 1e-8).unwrap();
        let b = discretize(|x, y, u, v| g.kernel(x, y, u, v) * lambda, &grid, 1e-8).unwrap();
        prop_assert_eq!(a.rho.matrix(), b.rho.matrix());
    }
}
