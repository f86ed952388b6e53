//! The counter-based Gaussian lattice: random access, reproducible
//! replicates and the logarithmic envelope.

use mbmlab::noise::NoiseLattice;

fn main() {
    let lattice = NoiseLattice::new(2024);
    println!("ε(0,0) = {:.6}, ε(-3,17) = {:.6}", lattice.epsilon(0, 0), lattice.epsilon(-3, 17));

    let mut row = [0.0; 4];
    lattice.fill(5, -2, &mut row);
    println!("ε(5, -2..=1) = {row:.4?}");

    let r7 = lattice.replicate(7);
    println!("replicate 7 is its own stream: ε(0,0) = {:.6}", r7.epsilon(0, 0));

    let (exceed, ratio) = lattice.envelope(512, 6.0);
    println!("|ε| > 6√log(3+|j|+|k|) on |j|,|k| ≤ 512: {exceed} times; max ratio {ratio:.3}");
}
