// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tnslab::geometry::{mu_ring, stabilizer_lie_dim};
use tnslab::linalg::{random_complex, svd, DEFAULT_RANK_TOL};
use tnslab::mps_obc::from_state_obc;
use tnslab::mps_pbc::eval_pbc;
use tnslab::network::Network;
use tnslab::peps::{eval_peps, psi_t_peps};
use tnslab::contract;

fn kernels(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let a = random_complex(&[16, 8, 16], &mut rng);
    let b = random_complex(&[16, 8, 16], &mut rng);
    c.bench_function("contract_two_axes", |bch| {
        bch.iter(|| contract(black_box(&a), black_box(&b), &[(0, 0), (2, 2)]).unwrap())
    });

    let m = random_complex(&[128, 128], &mut rng);
    c.bench_function("svd_128", |bch| bch.iter(|| svd(black_box(&m), DEFAULT_RANK_TOL).unwrap()));

    let dims = [2usize; 10];
    let psi = random_complex(&dims, &mut rng).normalized().unwrap();
    c.bench_function("from_state_obc_n10", |bch| {
        bch.iter(|| from_state_obc(black_box(&psi), &dims, None).unwrap())
    });

    let net = Network::grid(2, 3, 1, 2).unwrap().with_pair_dims().unwrap();
    let peps = psi_t_peps(&net, &[0, 1, 4, 3], 0.1).unwrap();
    c.bench_function("eval_peps_2x3", |bch| bch.iter(|| eval_peps(black_box(&peps)).unwrap()));

    let mu = eval_pbc(&mu_ring(3, 2).unwrap()).unwrap();
    c.bench_function("stabilizer_lie_dim_mu", |bch| {
        bch.iter(|| stabilizer_lie_dim(black_box(&mu), &[4, 4, 4]).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = kernels
}
criterion_main!(benches);
