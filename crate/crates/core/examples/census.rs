//! Prints the rod equilibria for given M and v.
use varstab::par::Execution;
use varstab::rod::{enumerate_equilibria, RodParams};

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (m, v) = (args.first().copied().unwrap_or(81.0), args.get(1).copied().unwrap_or(1.5));
    let p = RodParams::new(m, v).expect("parameters");
    let t = std::time::Instant::now();
    let eqs = enumerate_equilibria(&p, Execution::default()).expect("enumeration");
    for q in &eqs {
        println!(
            "{:>9} k={} e={:.6} theta0={:+.6} E={:>10.4} {:?} {} I={:?} J={:?} beta={:?} oracle={:?} res={:.1e} {:?}",
            q.category.name(),
            q.k,
            q.e,
            q.theta0,
            q.energy,
            q.verdict.verdict,
            q.verdict.theorem,
            q.verdict.i,
            q.verdict.j,
            q.verdict.beta,
            q.oracle_index,
            q.residual,
            q.notes
        );
    }
    println!("{} equilibria in {:?}", eqs.len(), t.elapsed());
    if std::env::var("CENSUS").is_ok() {
        for c in varstab::rod::shooting_census(&p, 20000, Execution::default()).expect("census") {
            println!("shoot theta0={:+.9} e={:.9} E={:>10.4} {:?} {}", c.theta0, c.e, c.energy, c.verdict.verdict, c.verdict.theorem);
        }
    }
}
