//! Tables of partition counters from brute-force enumeration, with the
//! partition numbers cross-checked against Euler's pentagonal recurrence.
//!
//! `cargo run --release --example partition_tables`

use qverify::partitions::{count, partition_numbers_pentagonal, AllPartitions, Partition};

fn main() {
    let names = ["p", "d", "spt", "lpt", "N2", "w", "ssptd", "NSC", "pbar", "rstar"];
    println!("n\t{}", names.join("\t"));
    let pent = partition_numbers_pentagonal(12);
    for n in 1..=12u32 {
        let row: Vec<String> = names
            .iter()
            .map(|c| count(c, n, None).unwrap().to_string())
            .collect();
        assert_eq!(count("p", n, None).unwrap(), pent[n as usize]);
        println!("{n}\t{}", row.join("\t"));
    }

    println!("\npartitions of 5 with rank and smallest-part multiplicity:");
    for p in AllPartitions::new(5) {
        let st = p.stats();
        println!("  {:?}\trank {:>2}\tconjugate {:?}", p.parts(), st.rank, p.conjugate().parts());
    }
    let p = Partition::new(vec![3, 1, 4, 1]);
    println!("\n{:?} sorted: {:?}", [3, 1, 4, 1], p.parts());
}
