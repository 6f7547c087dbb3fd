//! Two-sample checks that every companion-set construction leaves the
//! marginal distribution of its task untouched. Each test compares a
//! transformed dataset against an independently drawn fresh one.

use boundlab::expnet::{negate_all_but_noise, sample_dataset_exp, ExpTaskConfig};
use boundlab::linear::{noise_negate, sample_dataset, LinearTaskConfig};
use boundlab::numerics::RngStream;
use boundlab::relu::{project_swap, sample_hypersphere, HypersphereConfig};
use test_oracles::{ks_critical, ks_statistic};

#[test]
fn negated_linear_noise_is_indistinguishable_from_fresh_noise() {
    let cfg = LinearTaskConfig::with_noise_dim(200, 20, 0.05, 0.05).unwrap();
    let k = cfg.signal_dim();
    let original = sample_dataset(&cfg, RngStream::new(101, 0));
    let negated = noise_negate(&original, &cfg).unwrap();
    let fresh = sample_dataset(&cfg, RngStream::new(101, 1));

    let pool = |data: &boundlab::losses::Dataset| -> Vec<f64> {
        data.iter().flat_map(|e| e.x[k..].to_vec()).collect()
    };
    let a = pool(&negated);
    let b = pool(&fresh);
    let d = ks_statistic(&a, &b);
    let crit = ks_critical(a.len(), b.len());
    assert!(d < crit, "noise coordinates drifted: KS {d} vs critical {crit}");

    for (orig, neg) in original.iter().zip(negated.iter()) {
        assert_eq!(orig.y, neg.y, "negation must not touch labels");
        assert_eq!(&orig.x[..k], &neg.x[..k], "negation must not touch the signal block");
    }
}

#[test]
fn exp_companion_set_preserves_every_marginal() {
    let cfg = ExpTaskConfig::with_dim(500, 32, 0.1, 0.1).unwrap();
    let original = sample_dataset_exp(&cfg, RngStream::new(102, 0));
    let companion = negate_all_but_noise(&original, cfg.dim).unwrap();
    let fresh = sample_dataset_exp(&cfg, RngStream::new(102, 1));

    // The noise block is untouched by construction, so compare it to a
    // fresh draw coordinate by coordinate.
    let noise_pool = |data: &boundlab::losses::Dataset| -> Vec<f64> {
        data.iter().flat_map(|e| e.x[cfg.dim..].to_vec()).collect()
    };
    let a = noise_pool(&companion);
    let b = noise_pool(&fresh);
    let d = ks_statistic(&a, &b);
    let crit = ks_critical(a.len(), b.len());
    assert!(d < crit, "noise coordinates drifted: KS {d} vs critical {crit}");

    let norms = |data: &boundlab::losses::Dataset| -> Vec<f64> {
        data.iter()
            .map(|e| e.x[cfg.dim..].iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    };
    let dn = ks_statistic(&norms(&companion), &norms(&fresh));
    let critn = ks_critical(cfg.m, cfg.m);
    assert!(dn < critn, "noise norms drifted: KS {dn} vs critical {critn}");

    // Flipped labels still satisfy the signal construction x1 = y u,
    // so the companion's signal block is distributed like the original.
    for e in companion.iter() {
        for (j, &v) in e.x[..cfg.dim].iter().enumerate() {
            assert_eq!(v, e.y as f64 * cfg.direction[j], "signal construction broken");
        }
    }

    let mean_y = |data: &boundlab::losses::Dataset| -> f64 {
        data.iter().map(|e| e.y as f64).sum::<f64>() / data.len() as f64
    };
    assert_eq!(mean_y(&companion), -mean_y(&original));
    assert!(mean_y(&companion).abs() < 0.15, "labels should stay near balanced");
}

#[test]
fn projection_swap_preserves_the_sampling_distribution() {
    let cfg = HypersphereConfig::new(16, 1.0, 1.1).unwrap();
    let m = 4000;
    let original = sample_hypersphere(&cfg, m, RngStream::new(103, 0)).unwrap();
    let swapped = project_swap(&original, &cfg).unwrap();
    let fresh = sample_hypersphere(&cfg, m, RngStream::new(103, 1)).unwrap();

    // Directions are uniform, so any fixed coordinate is identically
    // distributed across points; compare first coordinates.
    let firsts = |data: &boundlab::losses::Dataset| -> Vec<f64> {
        data.iter().map(|e| e.x[0]).collect()
    };
    let d = ks_statistic(&firsts(&swapped), &firsts(&fresh));
    let crit = ks_critical(m, m);
    assert!(d < crit, "first coordinates drifted: KS {d} vs critical {crit}");

    // Every swapped point still sits on one of the two spheres, with
    // the same label-to-radius convention the sampler uses, and the
    // sphere occupancies agree up to coin-flip noise.
    let inner_count = |data: &boundlab::losses::Dataset| -> usize {
        data.iter()
            .filter(|e| {
                let norm = e.x.iter().map(|v| v * v).sum::<f64>().sqrt();
                (norm - cfg.r_inner).abs() < 1e-9
            })
            .count()
    };
    for e in swapped.iter() {
        let norm = e.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let expected = if e.y == -1 { cfg.r_inner } else { cfg.r_outer };
        assert!((norm - expected).abs() < 1e-9, "label {} on radius {norm}", e.y);
    }
    let diff = inner_count(&swapped) as f64 - inner_count(&fresh) as f64;
    assert!(diff.abs() < 150.0, "sphere occupancy shifted by {diff} of {m}");
}
