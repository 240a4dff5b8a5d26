use clap::Parser;
use gcr_cli::{render, run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprint!("{}", render(&e.to_json()));
            e.exit_code()
        }
    };
    std::process::exit(code);
}
