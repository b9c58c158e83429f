use rainbow_core::extract::{extract_all, ExtractConfig};
use rainbow_core::oracle::{gen_instance, verify_certificate, GenMode, InstanceSpec};

fn main() {
    for n in 1..=12usize {
        for k in 0..=6usize {
            for seed in 0..40u64 {
                let inst = gen_instance(&InstanceSpec {
                    n, k,
                    seed: seed.wrapping_mul(0x9E3779B9) ^ ((n * 100 + k) as u64),
                    mode: GenMode::Uniform,
                }).unwrap();
                let cfg = ExtractConfig { seed, ..Default::default() };
                let out = extract_all(&inst.matroid, &inst.bases, &cfg).unwrap();
                assert!(verify_certificate(&inst.matroid, &inst.bases, &out.certificate).unwrap());
                if out.certificate.t() < n {
                    let eta_stop = n - out.certificate.t();
                    println!(
                        "n={n} k={k} seed={seed} t={} eta_at_stop={} stop={:?}",
                        out.certificate.t(), eta_stop, out.certificate.stop
                    );
                }
            }
        }
    }
}
