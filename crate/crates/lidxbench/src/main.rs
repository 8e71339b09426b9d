fn main() {
    if let Err(err) = lidxbench::cli::run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
