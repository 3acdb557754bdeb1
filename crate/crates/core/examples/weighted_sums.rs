//! Weighted partition sums: the rank-sign weights at n = 5 and the
//! distinct-partition weight that vanishes at n = 10.
//!
//! `cargo run --release --example weighted_sums`

use qverify::partitions::{count, enumerate, weighted_sum, PartitionClass};

fn main() {
    for id in ["W_RANKS_L", "W_RANKS_R"] {
        println!("{id}(5) = {}", weighted_sum(id, 5).unwrap());
    }
    println!("\ndistinct partitions of 10:");
    for p in enumerate(PartitionClass::Distinct, 10) {
        println!("  {:?}", p.parts());
    }
    println!(
        "W_DEO_L(10) = {}, d_o(10) = {}, d_e(10) = {}",
        weighted_sum("W_DEO_L", 10).unwrap(),
        count("d_o", 10, None).unwrap(),
        count("d_e", 10, None).unwrap()
    );
    println!("\nsymbolic weights in z and c:");
    for n in 1..=4 {
        println!("  W_GWPI_L({n}) = {}", weighted_sum("W_GWPI_L", n).unwrap());
    }
}
