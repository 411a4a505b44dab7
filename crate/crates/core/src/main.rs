fn main() {
    std::process::exit(peer_adjoint::harness::cli::run(std::env::args_os()));
}
