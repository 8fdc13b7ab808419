use std::io::IsTerminal;

fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let color = susmod_cli::use_color(stderr.is_terminal());
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let mut io = susmod_cli::Io {
        out: &mut out,
        err: &mut err,
        color,
    };
    let code = susmod_cli::run(std::env::args_os(), &mut io);
    std::process::exit(code);
}
