//! Exact probability that a distance lands near a random inner radius.
use dyadic_cubes::random::{annulus_hit_probability, annulus_sweep, default_eps_grid, distance_grid};
use dyadic_cubes::scale::parse_rational;
use dyadic_cubes::{Delta, Rational};

fn main() -> dyadic_cubes::Result<()> {
    let delta = Delta::parse("0.1")?;
    let p = annulus_hit_probability(delta, 0, Rational::from_integer(1), parse_rational("1.53")?, parse_rational("0.04")?)?;
    println!("P = {} <= {} ({} of {} draws)", p.probability, p.bound, p.hits, p.support);

    for d in ["0.1", "1/60"] {
        let delta = Delta::parse(d)?;
        for m in [Rational::from_integer(1), Rational::new(1, 4)] {
            let s = annulus_sweep(delta, 0, m, &distance_grid(delta, 0, 200), &default_eps_grid(delta, 0))?;
            println!("delta {delta} m {m}: {} cases, {} violations, max P {:.4}", s.cases, s.lemma_violations, s.max_probability);
        }
    }
    Ok(())
}
