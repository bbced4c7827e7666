//! Configuration files, output files and the batch commands.

mod commands;
mod config_file;
mod output;

pub use commands::{
    apply_param, base_step, bounds_table, cmd_convergence, cmd_oracle, cmd_run, cmd_sweep,
    cmd_validate, convergence_table, load_config, run_to_dir, sweep, CliError, Exit, RunOutcome,
    SweepRow, SWEEP_PARAMS, THREADS_ENV,
};
pub use config_file::{config_pairs, config_text, parse_config, parse_pairs};
pub use output::{
    write_fields_csv, write_fronts_csv, write_json, write_run_output, ConfigEcho, Header,
    RunReport, FIELDS_FILE, FRONTS_FILE, HEADER_FILE, REPORT_FILE,
};
