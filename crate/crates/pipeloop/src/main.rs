fn main() {
    std::process::exit(pipeloop::run(std::env::args_os()));
}
