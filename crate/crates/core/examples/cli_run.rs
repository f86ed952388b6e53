//! Drives the experiment layer directly, as `mbmlab exponent` would.

use mbmlab::config::parse_config;
use mbmlab::experiment::{run, Subcommand};

fn main() -> mbmlab::Result<()> {
    let dir = std::env::temp_dir().join("mbmlab-example");
    let text = format!("a = 0.4\nb = 0.6\nbeta = 1\nell = 8\nregion.resolution = 50\nout_dir = {}\n", dir.display());
    let config = parse_config(&text)?;
    for cmd in [Subcommand::Exponent, Subcommand::Region] {
        let out = run(cmd, &config)?;
        for f in out.files {
            println!("{cmd}: wrote {}", f.display());
        }
    }
    print!("{}", std::fs::read_to_string(dir.join("exponent.csv"))?);
    Ok(())
}
