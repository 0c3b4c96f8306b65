fn main() {
    if let Err(e) = greedy_predict_cli::run(std::env::args_os()) {
        if e.code == 0 {
            print!("{e}");
        } else {
            eprintln!("error: {e}");
        }
        std::process::exit(e.code);
    }
}
