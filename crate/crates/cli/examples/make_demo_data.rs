//! Writes a small synthetic bilingual corpus plus its dictionaries and
//! translation memory, ready for the pipeline walkthrough in the README.
//!
//!     cargo run --release --example make_demo_data -- data/demo [train] [test] [seed]

use std::path::PathBuf;

use polysum_core::synthetic::{generate, write_corpus_files, SynthConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "data/demo".to_string()));
    let parse = |arg: Option<String>, default: usize| -> usize {
        arg.map(|v| v.parse().expect("numeric argument"))
            .unwrap_or(default)
    };
    let train_docs = parse(args.next(), 200);
    let test_docs = parse(args.next(), 50);
    let seed = parse(args.next(), 1) as u64;

    std::fs::create_dir_all(&dir).expect("create output directory");
    let corpus = generate(&SynthConfig {
        train_docs,
        test_docs,
        seed,
    })
    .expect("generate corpus");
    let files = write_corpus_files(&corpus, &dir).expect("write corpus files");
    println!("wrote:");
    for path in [
        &files.train_corpus,
        &files.test_corpus_source,
        &files.test_corpus_target,
        &files.dict_fwd,
        &files.dict_rev,
        &files.memory,
    ] {
        println!("  {}", path.display());
    }
}
