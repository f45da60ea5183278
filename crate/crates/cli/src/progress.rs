use std::time::Instant;

/// Progress lines on standard error; standard output stays data-only.
pub struct Progress {
    quiet: bool,
    start: Instant,
}

impl Progress {
    pub fn new(quiet: bool) -> Self {
        Self {
            quiet,
            start: Instant::now(),
        }
    }

    pub fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("[{:>8.2}s] {msg}", self.start.elapsed().as_secs_f64());
        }
    }
}
