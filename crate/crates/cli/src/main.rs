use clap::Parser;

fn main() {
    let (out, code) = hms_cli::execute(hms_cli::Cli::parse());
    if code == 3 && out.starts_with("error:") {
        eprint!("{out}");
    } else {
        print!("{out}");
    }
    std::process::exit(code);
}
