use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use cliffcft::cft::solve_m;
use cliffcft::entropy::{clip_gauge, entropy_subset};
use cliffcft::percolation::{build_instance, min_cut, Coloring, Wrap};
use cliffcft::stabilizer::{sample_two_qubit_clifford, StabilizerTableau};

fn scrambled_state(n: usize, layers: usize, seed: u64) -> StabilizerTableau {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut tab = StabilizerTableau::product_state(n).unwrap();
    for layer in 0..layers {
        let mut q = layer % 2;
        while q + 1 < n {
            let g = sample_two_qubit_clifford(&mut rng);
            tab.apply_gate(&g, &[q, q + 1]).unwrap();
            q += 2;
        }
        for site in 0..n {
            if rng.gen::<f64>() < 0.16 {
                tab.measure_z(site, &mut rng).unwrap();
            }
        }
    }
    tab
}

fn bench_layer(c: &mut Criterion) {
    let n = 256;
    let tab = scrambled_state(n, 16, 1);
    c.bench_function("brickwork_layer_n256", |b| {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        b.iter_batched(
            || tab.clone(),
            |mut t| {
                let mut q = 0;
                while q + 1 < n {
                    let g = sample_two_qubit_clifford(&mut rng);
                    t.apply_gate(&g, &[q, q + 1]).unwrap();
                    q += 2;
                }
                t
            },
            BatchSize::SmallInput,
        )
    });
}

fn bench_measure_sweep(c: &mut Criterion) {
    let n = 256;
    let tab = scrambled_state(n, 16, 3);
    c.bench_function("measure_sweep_n256_p0.16", |b| {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        b.iter_batched(
            || tab.clone(),
            |mut t| {
                for site in 0..n {
                    if rng.gen::<f64>() < 0.16 {
                        t.measure_z(site, &mut rng).unwrap();
                    }
                }
                t
            },
            BatchSize::SmallInput,
        )
    });
}

fn bench_entropy(c: &mut Criterion) {
    let n = 256;
    let tab = scrambled_state(n, 32, 5);
    let order: Vec<usize> = (0..n).collect();
    c.bench_function("clip_gauge_n256", |b| {
        b.iter(|| clip_gauge(&tab, &order).unwrap())
    });
    let half: Vec<usize> = (0..n / 2).collect();
    c.bench_function("entropy_subset_half_n256", |b| {
        b.iter(|| entropy_subset(&tab, &half).unwrap())
    });
}

fn bench_min_cut(c: &mut Criterion) {
    c.bench_function("min_cut_topbottom_256x256", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            let inst =
                build_instance(256, 256, 0.5, Coloring::TopVsBottom, Wrap::Open, seed).unwrap();
            min_cut(&inst)
        })
    });
}

fn bench_elliptic(c: &mut Criterion) {
    c.bench_function("solve_m_tau_grid", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 1..=40 {
                let tau = 0.05 * i as f64;
                acc += solve_m(tau).unwrap().mc;
            }
            acc
        })
    });
}

criterion_group!(
    benches,
    bench_layer,
    bench_measure_sweep,
    bench_entropy,
    bench_min_cut,
    bench_elliptic
);
criterion_main!(benches);
