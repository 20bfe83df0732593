use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Some(threads) = std::env::var("FRAMEPAVER_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // 0 keeps rayon's default of one thread per core
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let code = framepaver::cli::run(std::env::args_os(), &mut io::stdin(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
