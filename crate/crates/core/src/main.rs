fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(skewent::cli::cli_main(&args));
}
