fn main() {
    std::process::exit(motor_dae_cli::run(std::env::args()));
}
