use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    match propset::cli::run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                use clap::error::ErrorKind;
                if matches!(clap_err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                    print!("{clap_err}");
                    return ExitCode::SUCCESS;
                }
            }
            eprintln!("{}", propset::cli::error_line(&err));
            ExitCode::FAILURE
        }
    }
}
