fn main() {
    std::process::exit(thetaforge_cli::execute(std::env::args_os()));
}
