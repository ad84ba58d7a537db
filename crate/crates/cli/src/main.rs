use std::process::ExitCode;

fn main() -> ExitCode {
    let result = nelson_cli::build_plan(std::env::args_os().skip(1))
        .and_then(|plan| nelson_cli::execute_plan(&plan));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) if e.is_informational() => {
            print!("{e}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
