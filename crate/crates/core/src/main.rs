fn main() {
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let code = stochcut::cli::dispatch(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
