use std::process::ExitCode;

fn main() -> ExitCode {
    uav_offload::cli::run()
}
