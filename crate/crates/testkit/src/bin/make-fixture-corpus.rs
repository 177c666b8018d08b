//! Writes the synthetic offline corpus: `make-fixture-corpus <dir> [seed]`.

use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut args = std::env::args().skip(1);
    let Some(dir) = args.next().map(PathBuf::from) else {
        eprintln!("usage: make-fixture-corpus <dir> [seed]");
        return ExitCode::from(1);
    };
    let seed = match args.next().map(|s| s.parse::<u64>()) {
        None => vcf_testkit::fixture::DEFAULT_SEED,
        Some(Ok(s)) => s,
        Some(Err(e)) => {
            eprintln!("bad seed: {e}");
            return ExitCode::from(1);
        }
    };
    match vcf_testkit::fixture::write_fixture_corpus(&dir, seed) {
        Ok(s) => {
            println!(
                "{}: {} repositories ({} permissive), {} files ({} in permissive repositories)",
                dir.display(),
                s.repos,
                s.permissive_repos,
                s.files,
                s.permissive_files
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e}", dir.display());
            ExitCode::from(2)
        }
    }
}
