fn main() {
    std::process::exit(orbitgauge::run(std::env::args_os()));
}
