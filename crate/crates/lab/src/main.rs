use std::process::ExitCode;

fn main() -> ExitCode {
    let config = match reward_lab::parse_config(std::env::args().skip(1)) {
        Ok(c) => c,
        Err(e) if e.display_only => {
            print!("{}", e.message);
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let code = reward_lab::run(
        &config,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
