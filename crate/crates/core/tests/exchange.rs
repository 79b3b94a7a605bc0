//! Exchange consistency: measuring a fixed basis assignment in different
//! connectivity-respecting orders yields the same joint outcome
//! distribution, which also matches the brute-force oracle.

use planar_mqc_core::codestate::{partial_overlap, MeasurementBasis, ProductState};
use planar_mqc_core::lattice::Lattice;
use planar_mqc_core::mqc::raster_order;
use planar_mqc_core::oracle;
use std::f64::consts::{PI, TAU};

fn xorshift(state: &mut u64) -> f64 {
    *state ^= *state << 13;
    *state ^= *state >> 7;
    *state ^= *state << 17;
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

/// Joint probability of every full outcome string under a measurement
/// order, by walking the whole binary outcome tree with the chain rule.
fn joint_distribution(lat: &Lattice, order: &[usize], bases: &[MeasurementBasis]) -> Vec<f64> {
    let n = lat.n_edges();
    let mut joints = vec![0.0f64; 1 << n];
    let mut covered = lat.empty_edge_set();
    let mut phi = ProductState::new(lat);

    fn descend(
        lat: &Lattice,
        order: &[usize],
        bases: &[MeasurementBasis],
        depth: usize,
        mask: usize,
        log_joint: f64,
        covered: &mut planar_mqc_core::EdgeSet,
        phi: &mut ProductState,
        joints: &mut [f64],
    ) {
        if depth == order.len() {
            joints[mask] = log_joint.exp();
            return;
        }
        let edge = order[depth];
        covered.set(edge, true);
        assert!(lat.is_connected(covered) && lat.is_connected(&covered.complement()));
        for outcome in 0..2u8 {
            phi.set(edge, bases[edge].state(outcome));
            let l = partial_overlap(lat, covered, phi).unwrap().ln();
            if l > f64::NEG_INFINITY {
                let child_mask = mask | ((outcome as usize) << edge);
                descend(lat, order, bases, depth + 1, child_mask, l, covered, phi, joints);
            }
        }
        phi.unset(edge);
        covered.set(edge, false);
    }

    descend(lat, order, bases, 0, 0, 0.0, &mut covered, &mut phi, &mut joints);
    joints
}

#[test]
fn l2_joint_distribution_is_order_independent_and_matches_oracle() {
    let lat = Lattice::new(2).unwrap();
    let n = lat.n_edges();
    let mut state = 0xd1ce_5eedu64;
    let bases: Vec<MeasurementBasis> = (0..n)
        .map(|_| MeasurementBasis::new(xorshift(&mut state) * PI, xorshift(&mut state) * TAU))
        .collect();

    let forward: Vec<usize> = raster_order(&lat)
        .iter()
        .map(|&e| lat.edge_index(e).unwrap())
        .collect();
    let mut backward = forward.clone();
    backward.reverse();

    let dist_forward = joint_distribution(&lat, &forward, &bases);
    let dist_backward = joint_distribution(&lat, &backward, &bases);

    let mut total = 0.0;
    for mask in 0..1usize << n {
        assert!(
            (dist_forward[mask] - dist_backward[mask]).abs() < 1e-8,
            "orders disagree at {mask:#014b}"
        );
        let mut phi = ProductState::new(&lat);
        for e in 0..n {
            phi.set(e, bases[e].state((mask >> e & 1) as u8));
        }
        let expect = oracle::oracle_overlap(&lat, &phi).unwrap().norm_sqr();
        assert!(
            (dist_forward[mask] - expect).abs() < 1e-8,
            "oracle disagrees at {mask:#014b}: {} vs {expect}",
            dist_forward[mask]
        );
        total += dist_forward[mask];
    }
    assert!((total - 1.0).abs() < 1e-8, "joint distribution sums to {total}");
}
