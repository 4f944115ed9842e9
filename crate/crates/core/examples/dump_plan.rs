//! Dumps the benchmark corpus lengths and both epoch plans as plain text.
//!
//! The output feeds `tools/padding_oracle.py`, which recomputes padding
//! ratios by brute force without touching this crate's analytic code.
//!
//! ```text
//! cargo run --example dump_plan > /tmp/dump.txt
//! python3 tools/padding_oracle.py /tmp/dump.txt
//! ```

use seqpipe::dataset::{compute_lengths, DEFAULT_KEY_FIELD};
use seqpipe::registry::{generate_synthetic, LengthDistribution, SyntheticSpec};
use seqpipe::sampler::{make_buckets, plan_fixed_bucket, plan_random, BucketScheme};

const SEED: u64 = 42;
const BATCH_SIZE: usize = 32;
const NUM_BUCKETS: usize = 10;

fn main() {
    let spec = SyntheticSpec {
        count: 10000,
        vocab_size: 32768,
        seed: SEED,
        length: LengthDistribution::Uniform { lo: 1, hi: 100 },
    };
    let dataset = generate_synthetic(&spec).expect("spec is valid");
    let stats = compute_lengths(&dataset, DEFAULT_KEY_FIELD).expect("field 0 is varseq");

    println!("# corpus uniform:1:100:10000:{SEED}");
    println!("lengths {}", stats.len());
    for &len in stats.lengths() {
        println!("{len}");
    }

    let random = plan_random(dataset.len(), BATCH_SIZE, SEED, false).expect("plan args valid");
    println!("plan random seed={SEED} batch_size={BATCH_SIZE}");
    print!("{}", random.to_text());

    let spec = make_buckets(&stats, NUM_BUCKETS, BucketScheme::ConstantWidth)
        .expect("bucket args valid");
    let bucketed = plan_fixed_bucket(&stats, &spec, BATCH_SIZE, true, SEED, false)
        .expect("plan args valid");
    println!(
        "plan fixed-bucket seed={SEED} batch_size={BATCH_SIZE} num_buckets={}",
        spec.len()
    );
    print!("{}", bucketed.to_text());
}
