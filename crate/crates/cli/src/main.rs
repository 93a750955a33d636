fn main() {
    std::process::exit(arrival_lab::run_main(std::env::args_os()));
}
