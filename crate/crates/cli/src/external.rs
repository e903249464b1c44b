//! Adapter for an external process model speaking a line protocol.
//!
//! One request line per point: the coordinates as space-separated decimals
//! at 17 significant digits, newline-terminated. The process answers one
//! decimal per line, in request order. The process is spawned once and
//! reused across batches; requests are flushed in configurable chunks.

use smolyak_ps::error::{CoreError, PointFailure};
use smolyak_ps::fmt::sig17;
use smolyak_ps::model::ModelFunction;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::CliError;

struct Pipes {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

pub struct ExternalModel {
    dim: usize,
    command: Vec<String>,
    batch_size: usize,
    pipes: Mutex<Pipes>,
    lines_sent: AtomicU64,
    lines_read: AtomicU64,
}

impl ExternalModel {
    pub fn spawn(dim: usize, command: &[String], batch_size: usize) -> Result<Self, CliError> {
        let mut cmd = Command::new(&command[0]);
        cmd.args(&command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped());
        let mut child = cmd
            .spawn()
            .map_err(|e| CliError::model(format!("failed to launch {:?}: {e}", command[0])))?;
        let stdin = BufWriter::new(child.stdin.take().expect("stdin piped"));
        let stdout = BufReader::new(child.stdout.take().expect("stdout piped"));
        Ok(ExternalModel {
            dim,
            command: command.to_vec(),
            batch_size: batch_size.max(1),
            pipes: Mutex::new(Pipes {
                child,
                stdin,
                stdout,
            }),
            lines_sent: AtomicU64::new(0),
            lines_read: AtomicU64::new(0),
        })
    }

    /// Total request lines written so far (one per deduplicated point).
    pub fn lines_sent(&self) -> u64 {
        self.lines_sent.load(Ordering::SeqCst)
    }

    fn protocol_error(&self, pipes: &mut Pipes, index: usize, point: &[f64], reason: String) -> CoreError {
        // distinguish a crashed process from a malformed reply
        let status = pipes.child.try_wait().ok().flatten();
        let reason = match status {
            Some(st) if !st.success() => {
                format!("{reason}; process {:?} exited with {st}", self.command[0])
            }
            _ => reason,
        };
        CoreError::ModelEvaluation {
            failures: vec![PointFailure {
                index,
                point: point.to_vec(),
                reason,
            }],
        }
    }
}

impl ModelFunction for ExternalModel {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> smolyak_ps::Result<f64> {
        Ok(self.eval_batch(std::slice::from_ref(&x.to_vec()))?[0])
    }

    fn eval_batch(&self, points: &[Vec<f64>]) -> smolyak_ps::Result<Vec<f64>> {
        let mut pipes = self.pipes.lock().expect("external model lock");
        let mut out = Vec::with_capacity(points.len());
        for chunk in points.chunks(self.batch_size) {
            for p in chunk {
                let mut line = String::with_capacity(self.dim * 24);
                for (i, &c) in p.iter().enumerate() {
                    if i > 0 {
                        line.push(' ');
                    }
                    line.push_str(&sig17(c));
                }
                line.push('\n');
                if let Err(e) = pipes.stdin.write_all(line.as_bytes()) {
                    let err =
                        self.protocol_error(&mut pipes, out.len(), p, format!("write failed: {e}"));
                    return Err(err);
                }
                self.lines_sent.fetch_add(1, Ordering::SeqCst);
            }
            if let Err(e) = pipes.stdin.flush() {
                let err = self.protocol_error(
                    &mut pipes,
                    out.len(),
                    &chunk[0],
                    format!("flush failed: {e}"),
                );
                return Err(err);
            }
            for p in chunk {
                let mut line = String::new();
                let lineno = self.lines_read.load(Ordering::SeqCst) + 1;
                let n = match pipes.stdout.read_line(&mut line) {
                    Ok(n) => n,
                    Err(e) => {
                        let err = self.protocol_error(
                            &mut pipes,
                            out.len(),
                            p,
                            format!("read failed at line {lineno}: {e}"),
                        );
                        return Err(err);
                    }
                };
                self.lines_read.fetch_add(1, Ordering::SeqCst);
                if n == 0 {
                    let err = self.protocol_error(
                        &mut pipes,
                        out.len(),
                        p,
                        format!("response stream ended at line {lineno}"),
                    );
                    return Err(err);
                }
                let token = line.trim();
                match token.parse::<f64>() {
                    Ok(value) => out.push(value),
                    Err(_) => {
                        let err = self.protocol_error(
                            &mut pipes,
                            out.len(),
                            p,
                            format!("non-numeric response token {token:?} at line {lineno}"),
                        );
                        return Err(err);
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        if let Ok(mut pipes) = self.pipes.lock() {
            let _ = pipes.child.kill();
            let _ = pipes.child.wait();
        }
    }
}
