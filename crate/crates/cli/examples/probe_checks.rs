use cli::suite::{Profile, CHECKS};
use std::io::Write;
use std::time::Instant;

fn main() {
    for &(name, _, check) in CHECKS {
        let start = Instant::now();
        let r = check(Profile::Full);
        println!("{name}: {:?} in {:.1}s", r.err().map(|e| e.chars().take(80).collect::<String>()), start.elapsed().as_secs_f64());
        std::io::stdout().flush().unwrap();
    }
}
