use clap::Parser;

fn main() -> std::process::ExitCode {
    strip_spectra::run(strip_spectra::Cli::parse())
}
