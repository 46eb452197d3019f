use std::io::Write;

fn main() {
    let env = std::env::var_os(anosov_forge_cli::CONFIG_ENV).map(Into::into);
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = anosov_forge_cli::run(std::env::args_os(), env, &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    std::process::exit(code);
}
