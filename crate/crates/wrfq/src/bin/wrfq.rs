use clap::Parser;

#[derive(Parser)]
#[command(name = "wrfq", version, about = "weighted quotient graphs of lattice-ball trees")]
struct Cli {}

fn main() {
    let _cli = Cli::parse();
    eprintln!("subcommands are under construction");
    std::process::exit(2);
}
