use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use lre_bench::ghz;
use lre_core::pauli::walsh_hadamard_in_place;
use lre_core::{Kernel, Reconstructor};

fn wht(c: &mut Criterion) {
    let mut g = c.benchmark_group("walsh_hadamard");
    for n in [6u32, 10, 14] {
        let mut v: Vec<f64> = (0..1usize << n).map(|k| k as f64).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| walsh_hadamard_in_place(black_box(&mut v)))
        });
    }
    g.finish();
}

fn step_one(c: &mut Criterion) {
    let mut g = c.benchmark_group("step_one");
    g.sample_size(10);
    for kernel in [Kernel::Fast, Kernel::PaperDirect] {
        let recon = Reconstructor::new(1, kernel).unwrap();
        for n in [5u32, 6, 7] {
            let st = ghz(n);
            g.bench_with_input(BenchmarkId::new(kernel.to_string(), n), &n, |b, _| {
                b.iter(|| recon.step_one(black_box(&st)).unwrap())
            });
        }
    }
    g.finish();
}

fn step_two(c: &mut Criterion) {
    let mut g = c.benchmark_group("step_two");
    g.sample_size(10);
    let recon = Reconstructor::new(1, Kernel::Fast).unwrap();
    for n in [6u32, 8] {
        let theta = recon.step_one(&ghz(n)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| recon.step_two(black_box(&theta)))
        });
    }
    g.finish();
}

fn step_three(c: &mut Criterion) {
    let mut g = c.benchmark_group("step_three");
    g.sample_size(10);
    let recon = Reconstructor::new(1, Kernel::Fast).unwrap();
    for n in [6u32, 8] {
        let mu = recon.step_two(&recon.step_one(&ghz(n)).unwrap());
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| recon.step_three(black_box(&mu)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, wht, step_one, step_two, step_three);
criterion_main!(benches);
