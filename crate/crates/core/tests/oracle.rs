//! Closed forms cross-checked against the link simulator.
//!
//! Each test builds an empirical CDF/outage estimate from the sampler and
//! requires the analytic value to sit within three binomial standard errors
//! of it (standard error taken under the analytic value).  Seeds are fixed,
//! so these are deterministic regression tests of both sides at once.

use cooplink::channel::{
    cc_combiner_cdf, cc_combiner_pdf, ec_combiner_cdf, iid_snr_cdf, CorrelatedArray,
    CorrelationModel, FadingLink, PowerBudget,
};
use cooplink::montecarlo::{estimate_pep, CorrelatedGainSampler, RngSpec, TrialRunner};
use cooplink::pep::{best_relay_outage, block_error_prob, Scenario, TcModel};

fn link(m: f64, mean_snr: f64) -> FadingLink {
    FadingLink::new(m, mean_snr, 10.0, 2.0).unwrap()
}

fn z_score(analytic: f64, hits: u64, trials: u64) -> f64 {
    let p_hat = hits as f64 / trials as f64;
    let se = (analytic * (1.0 - analytic) / trials as f64).sqrt();
    if se == 0.0 {
        if p_hat == analytic {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (p_hat - analytic) / se
    }
}

#[test]
fn single_branch_cdf_matches_gamma_draws() {
    // m = 2, γ̄ = 5, threshold 3
    let l = link(2.0, 5.0);
    let gamma0 = 3.0;
    let analytic = iid_snr_cdf(&l, gamma0).unwrap();

    let array = CorrelatedArray::new(1, CorrelationModel::Cc(0.0), l).unwrap();
    let sampler = CorrelatedGainSampler::new(&array).unwrap();
    let trials = 1_000_000u64;
    let mut rng = RngSpec::new(2024, 0).trial_rng(0);
    let mut hits = 0u64;
    for _ in 0..trials {
        if l.mean_snr * sampler.sample(&mut rng)[0] < gamma0 {
            hits += 1;
        }
    }
    let z = z_score(analytic, hits, trials);
    assert!(z.abs() <= 3.0, "z = {z}, analytic = {analytic}");
}

#[test]
fn cc_density_matches_sampled_histogram() {
    // M = 4, m = 1, ρ = 0.1, γ̄ = 1: compare bin mass around z = 2 rather
    // than a kernel density estimate; the bin integral comes from the pdf
    let array = CorrelatedArray::new(4, CorrelationModel::Cc(0.1), link(1.0, 1.0)).unwrap();
    let sampler = CorrelatedGainSampler::new(&array).unwrap();
    let (lo, hi) = (1.9, 2.1);

    // expected bin mass by quadrature of the density
    let ctl = cooplink::specfun::quad::QuadControl::default();
    let mass = cooplink::specfun::quad::integrate(
        |z| cc_combiner_pdf(&array, z).unwrap(),
        lo,
        hi,
        &[],
        &ctl,
    )
    .unwrap()
    .value;

    let trials = 400_000u64;
    let mut rng = RngSpec::new(7, 1).trial_rng(0);
    let mut hits = 0u64;
    for _ in 0..trials {
        let z: f64 = sampler.sample(&mut rng).iter().sum();
        if z >= lo && z < hi {
            hits += 1;
        }
    }
    let z = z_score(mass, hits, trials);
    assert!(z.abs() <= 3.0, "z = {z}, bin mass = {mass}");
}

#[test]
fn cc_cdf_matches_empirical_cdf() {
    // array at the default operating point: M = 10, ρ = 0.1, γ̄ = 31.6
    let array = CorrelatedArray::new(10, CorrelationModel::Cc(0.1), link(1.0, 31.6)).unwrap();
    let sampler = CorrelatedGainSampler::new(&array).unwrap();
    let trials = 100_000u64;

    // thresholds where the binomial z-test has resolution (expected hit
    // counts from ~10² up); the far tail is pinned against an exact
    // convolution in the unit tests instead
    for (i, &gamma0) in [158.0, 250.0, 316.0, 400.0, 470.0].iter().enumerate() {
        let analytic = cc_combiner_cdf(&array, gamma0).unwrap();
        let mut rng = RngSpec::new(42, i as u64).trial_rng(0);
        let mut hits = 0u64;
        for _ in 0..trials {
            let z: f64 = sampler.sample(&mut rng).iter().map(|g| g * 31.6).sum();
            if z < gamma0 {
                hits += 1;
            }
        }
        let z = z_score(analytic, hits, trials);
        assert!(z.abs() <= 3.0, "γ₀ = {gamma0}: z = {z}, analytic = {analytic}");
    }
}

#[test]
fn ec_cdf_tracks_empirical_cdf_where_the_fit_is_tight() {
    // the EC closed form is a two-moment fit; in the far tail and near the
    // bulk it sits within Monte Carlo resolution of the exact law
    let array = CorrelatedArray::new(10, CorrelationModel::Ec(0.1), link(1.0, 31.6)).unwrap();
    let sampler = CorrelatedGainSampler::new(&array).unwrap();
    let trials = 100_000u64;

    for (i, &gamma0) in [0.1, 31.6, 250.0].iter().enumerate() {
        let analytic = ec_combiner_cdf(&array, gamma0).unwrap();
        let mut rng = RngSpec::new(43, i as u64).trial_rng(0);
        let mut hits = 0u64;
        for _ in 0..trials {
            let z: f64 = sampler.sample(&mut rng).iter().map(|g| g * 31.6).sum();
            if z < gamma0 {
                hits += 1;
            }
        }
        let z = z_score(analytic, hits, trials);
        assert!(z.abs() <= 3.0, "γ₀ = {gamma0}: z = {z}, analytic = {analytic}");
    }
}

#[test]
fn best_relay_outage_matches_max_of_exponentials() {
    // N = 5 Rayleigh links with γ̄ = 158.1, γ₀ chosen where outage is visible
    let links = vec![link(1.0, 158.1); 5];
    let gamma0 = 100.0;
    let analytic = best_relay_outage(&links, gamma0).unwrap();

    let single = CorrelatedArray::new(1, CorrelationModel::Cc(0.0), links[0]).unwrap();
    let sampler = CorrelatedGainSampler::new(&single).unwrap();
    let trials = 100_000u64;
    let mut rng = RngSpec::new(11, 0).trial_rng(0);
    let mut hits = 0u64;
    for _ in 0..trials {
        let best = (0..5)
            .map(|_| 158.1 * sampler.sample(&mut rng)[0])
            .fold(f64::NEG_INFINITY, f64::max);
        if best < gamma0 {
            hits += 1;
        }
    }
    let z = z_score(analytic, hits, trials);
    assert!(z.abs() <= 3.0, "z = {z}, analytic = {analytic}");
}

fn default_scenario(model: CorrelationModel) -> Scenario {
    // the crate's reference operating point: N = 5, M = 10, m = 1,
    // P/N₀ = 25 dB, φ = 0.5, d₁ = 25 m, d₂ = 8 m, α = 2.5
    let budget = PowerBudget::new(10f64.powf(2.5), 0.5, 1.0).unwrap();
    Scenario::from_geometry(
        budget, 5, 1.0, 25.0, 10, model, 8.0, 2.5, 0.1, 1024.0, 5.9e9, 20.0,
    )
    .unwrap()
}

#[test]
fn block_error_matches_end_to_end_trials() {
    for (s, model) in [
        (0u64, CorrelationModel::Ec(0.1)),
        (1, CorrelationModel::Cc(0.1)),
    ] {
        let sc = default_scenario(model);
        let analytic = block_error_prob(&sc).unwrap();
        let trials = 50_000u64;
        let runner = TrialRunner::new(&sc).unwrap();
        let spec = RngSpec::new(99, s);
        let mut hits = 0u64;
        for t in 0..trials {
            if runner.run_trial(&mut spec.trial_rng(t)).outage {
                hits += 1;
            }
        }
        let z = z_score(analytic, hits, trials);
        assert!(z.abs() <= 3.0, "model {model:?}: z = {z}, analytic = {analytic}");
    }
}

#[test]
fn estimate_pep_agrees_with_closed_form() {
    let sc = default_scenario(CorrelationModel::Ec(0.1));
    let blocks = 10;
    let analytic = cooplink::pep::packet_error_prob(&sc, blocks).unwrap();
    let est = estimate_pep(&sc, blocks, 50_000, RngSpec::new(7, 0)).unwrap();
    assert!(
        (est.pep - analytic).abs() <= 3.0 * est.pep_half_width.unwrap() / 1.96,
        "pep {} vs analytic {analytic} (half width {:?})",
        est.pep,
        est.pep_half_width
    );
    assert_eq!(est.trials, Some(50_000));
}

#[test]
fn sampler_determinism_across_runs() {
    let sc = default_scenario(CorrelationModel::Cc(0.1));
    let a = estimate_pep(&sc, 10, 10_000, RngSpec::new(5, 3)).unwrap();
    let b = estimate_pep(&sc, 10, 10_000, RngSpec::new(5, 3)).unwrap();
    assert_eq!(a.pep.to_bits(), b.pep.to_bits());
    let c = estimate_pep(&sc, 10, 10_000, RngSpec::new(5, 4)).unwrap();
    assert_ne!(a.block_error.to_bits(), c.block_error.to_bits());
}

#[test]
fn ties_to_scenario_tc_model() {
    // plumbing check: forcing blocks beats the coherence-time path
    let mut sc = default_scenario(CorrelationModel::Ec(0.1));
    sc.forced_blocks = Some(7);
    assert_eq!(cooplink::pep::num_blocks(&sc), 7);
    sc.forced_blocks = None;
    sc.tc_model = TcModel::Paper;
    assert!(cooplink::pep::num_blocks(&sc) >= 1);
}
