fn main() {
    std::process::exit(fcs_kit::cli::main());
}
