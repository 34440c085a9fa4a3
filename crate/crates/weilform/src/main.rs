use weilform::cli;

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match cli::run_command(&argv) {
        Ok(out) => {
            println!("{}", out.json);
            std::process::exit(out.exit);
        }
        Err(err) => {
            eprintln!("{err}");
            std::process::exit(cli::exit_code_for(&err));
        }
    }
}
