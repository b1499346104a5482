use clap::Parser;

use antisym::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((output, code)) => {
            println!("{output}");
            std::process::exit(code);
        }
        Err(err) => {
            let payload = serde_json::json!({
                "error": err.to_string(),
                "exit_code": err.exit_code(),
            });
            eprintln!("{payload}");
            std::process::exit(err.exit_code());
        }
    }
}
