use clap::Parser;

fn main() {
    let cli = vrabi_cli::Cli::parse();
    match vrabi_cli::run(&cli) {
        Ok(files) => {
            for file in files {
                println!("wrote {}", file.display());
            }
        }
        Err(e) => {
            eprintln!("vrabi: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
