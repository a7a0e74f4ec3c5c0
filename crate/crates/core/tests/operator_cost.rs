use std::time::Instant;

use probemul::{build_probe, gram_matvec, ProbeSchedule, Vector};

fn seconds_per_call(n: usize, calls: usize) -> f64 {
    let probe = build_probe(n, &ProbeSchedule::PAPER).unwrap();
    let gram = probe.gram();
    let x = Vector::new((0..n * n).map(|k| (k % 7) as f64 - 3.0).collect()).unwrap();
    std::hint::black_box(gram_matvec(&gram, &x).unwrap());
    let start = Instant::now();
    for _ in 0..calls {
        std::hint::black_box(gram_matvec(&gram, std::hint::black_box(&x)).unwrap());
    }
    start.elapsed().as_secs_f64() / calls as f64
}

#[test]
fn doubling_n_costs_at_most_five_times_as_much() {
    for n in [32, 64, 128] {
        let small = seconds_per_call(n, 200);
        let large = seconds_per_call(2 * n, 200);
        assert!(large <= 5.0 * small, "n = {n}: {small:e}s vs {large:e}s");
    }
}
