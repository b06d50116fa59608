use clap::Parser;

fn main() {
    env_logger::init();
    let cli = semirigid::cli::Cli::parse();
    let code = match semirigid::cli::run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            semirigid::cli::exit_code(&err)
        }
    };
    std::process::exit(code);
}
