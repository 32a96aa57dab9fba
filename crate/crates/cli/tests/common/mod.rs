#![allow(dead_code)]

use std::path::{Path, PathBuf};

use detox_cli::{run, Cli, CliError, Outcome};
use detox_core::corpus::{write_corpus, Corpus, ParallelPair, Split};
use detox_core::lang::LanguageTag;

pub fn pair(lang: LanguageTag, id: &str, toxic: &str, reference: &str) -> ParallelPair {
    ParallelPair {
        id: id.into(),
        lang,
        toxic: toxic.into(),
        references: vec![reference.into()],
        split: Split::Unsplit,
    }
}

pub fn save_corpus(dir: &Path, name: &str, lang: LanguageTag, pairs: Vec<ParallelPair>) -> PathBuf {
    let path = dir.join(name);
    write_corpus(&path, &Corpus::new(lang, pairs).unwrap()).unwrap();
    path
}

pub fn save(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

pub fn p(path: &Path) -> String {
    path.display().to_string()
}

/// Parses and runs one `detox` invocation.
pub fn detox(args: &[&str]) -> Result<Outcome, CliError> {
    let cli = Cli::from_args(std::iter::once("detox").chain(args.iter().copied())).unwrap();
    run(cli)
}

/// Exit code the binary would return.
pub fn exit_code(r: &Result<Outcome, CliError>) -> i32 {
    match r {
        Ok(o) => o.exit_code(),
        Err(e) => e.exit_code(),
    }
}
