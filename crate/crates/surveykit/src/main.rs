use std::process::ExitCode;

fn main() -> ExitCode {
    surveykit::cli::main()
}
