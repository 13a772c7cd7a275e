//! Mean number of items each persona gives up out of ten relevant ones, at
//! each persuasion level.
//!
//! ```bash
//! cargo run --example withholding
//! ```

use interview_sim::domain::{PersonaKind, PersuasionLevel, Scenario};
use interview_sim::persona::PersonaCatalog;
use interview_sim::rng::SimRng;
use interview_sim::withholding::items_to_return;

const DRAWS: usize = 10_000;

fn main() {
    let catalog = PersonaCatalog::bundled();
    let relevant: Vec<_> = Scenario::bundled()
        .into_iter()
        .flat_map(|s| s.items)
        .take(10)
        .collect();

    print!("{:<18} {:>5}", "persona", "shift");
    for level in PersuasionLevel::all() {
        print!(" {:>7}", format!("L{}", level.get()));
    }
    println!();
    for kind in PersonaKind::ALL {
        let profile = catalog.profile(kind);
        let mut rng = SimRng::new(42, kind.as_str());
        print!("{:<18} {:>+5}", kind.display_name(), profile.level_shift);
        for level in PersuasionLevel::all() {
            let total: usize = (0..DRAWS)
                .map(|_| items_to_return(&relevant, level, profile, &mut rng).items.len())
                .sum();
            print!(" {:>7.3}", total as f64 / DRAWS as f64);
        }
        println!();
    }
    println!("\ncolumns are judged levels; the shift is applied before the Beta draw");
}
