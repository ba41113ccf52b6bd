use std::io;
use std::process::ExitCode;

use clap::Parser;
use edge3c::cli::{run, Cli, THREADS_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().expect("thread pool");
    let code = pool.install(|| run(&cli, &mut io::stdout().lock(), &mut io::stderr().lock()));
    ExitCode::from(code as u8)
}
