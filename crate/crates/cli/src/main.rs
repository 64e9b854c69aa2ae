fn main() {
    let (mut out, mut err) = (String::new(), String::new());
    let code = mrc_cli::run(std::env::args_os(), &mut out, &mut err);
    print!("{out}");
    eprint!("{err}");
    std::process::exit(code);
}
