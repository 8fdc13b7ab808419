#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn corpus(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(path)
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the built binary in `dir` with colours off.
pub fn susmod_in(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_susmod"))
        .args(args)
        .current_dir(dir)
        .env("SUSMOD_NO_COLOR", "1")
        .output()
        .expect("binary runs");
    Output {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Runs the command in-process.
pub fn run(args: &[&str]) -> Output {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let mut io = susmod_cli::Io {
        out: &mut stdout,
        err: &mut stderr,
        color: false,
    };
    let code = susmod_cli::run(std::iter::once("susmod").chain(args.iter().copied()), &mut io);
    Output {
        code,
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A catalogue relating two patterns whose primary categories are two hops
/// apart.
pub const DISTANCE_TWO: &str = r#"catalogue "Ring" {
  cycle [North, East, South, West]
  center Hub

  pattern "Far" {
    summary "s"
    category South
    dimensions [social]
    applicability "a"
    content "c"
    archetype {
      goal G dims [social] "g"
    }
    example "e"
  }

  pattern "Near" {
    summary "s"
    category North
    dimensions [social]
    applicability "a"
    content "c"
    archetype {
      goal G dims [social] "g"
    }
    example "e"
    related ["Far"]
  }
}
"#;
