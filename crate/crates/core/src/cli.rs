//! Command-line front end: expression parsing, the `encode`/`eval`/`gap`/
//! `zx`/`scan`/`selftest`/`cases` verbs, text or JSON output.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage/parse error, 3 capacity.

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::embedding::{self, EmbedConfig};
use crate::encoder;
use crate::error::{Error, Result};
use crate::hamel::{HamelVector, Label};
use crate::rationals::Rational;
use crate::verify::{self, CampaignConfig, ExecMode, VerificationReport};

#[derive(Parser, Debug)]
#[command(name = "antisym", version, about = "Exact-arithmetic antisymmetry-gap toolkit")]
pub struct Cli {
    /// RNG seed for randomized campaigns
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Sample count for randomized campaigns
    #[arg(long, global = true, default_value_t = 10_000)]
    pub samples: u64,

    /// Largest non-empty code coordinate the embedding accepts
    #[arg(long = "n-max", global = true, default_value_t = 5)]
    pub n_max: u32,

    /// Coefficient-index bound for generated vectors
    #[arg(long = "max-index", global = true, default_value_t = 8)]
    pub max_index: u32,

    /// Emit machine-readable JSON
    #[arg(long, global = true)]
    pub json: bool,

    /// Run campaign bodies sequentially
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Encode an expression into its code point (JSON)
    Encode { expr: String },
    /// Evaluate the composed function exactly
    Eval {
        expr: String,
        /// Append an inexact decimal preview
        #[arg(long)]
        approx: bool,
    },
    /// Exact gap |f(x+s) - f(x-s)| with the per-point threshold comparison
    Gap { x: String, s: String },
    /// List the finite exceptional set of a point
    Zx { expr: String },
    /// Randomized containment campaign around a point
    Scan { expr: String },
    /// Exhaustive lemma check on a built-in small universe
    Selftest,
    /// Branch-coverage report: exhaustive run plus a randomized campaign
    Cases,
}

/// Parses the expression grammar: a sum of terms `R*y(BITS)` with R a
/// rational literal and BITS a canonical binary label; `0` is the zero
/// vector; whitespace is insignificant.
pub fn parse_expression(text: &str) -> Result<HamelVector> {
    ExprParser { bytes: text.as_bytes(), pos: 0 }.parse()
}

struct ExprParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn parse(mut self) -> Result<HamelVector> {
        let mut terms = Vec::new();
        self.skip_ws();
        if self.pos == self.bytes.len() {
            return Err(self.error("empty expression"));
        }
        loop {
            terms.push(self.term()?);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    self.skip_ws();
                }
                Some(c) => {
                    return Err(self.error(format!("expected '+' or end, found '{}'", c as char)))
                }
            }
        }
        Ok(HamelVector::from_terms(terms))
    }

    fn term(&mut self) -> Result<(Label, Rational)> {
        let coeff_pos = self.pos;
        let coeff = self.rational()?;
        self.skip_ws();
        if self.peek() != Some(b'*') {
            // A bare rational is only meaningful when it is zero.
            if coeff.is_zero() {
                return Ok((Label::empty(), Rational::zero()));
            }
            return Err(Error::Parse {
                position: coeff_pos,
                message: "a nonzero term needs the form R*y(BITS)".into(),
            });
        }
        self.pos += 1;
        self.skip_ws();
        if self.peek() != Some(b'y') {
            return Err(self.error("expected 'y('"));
        }
        self.pos += 1;
        if self.peek() != Some(b'(') {
            return Err(self.error("expected '(' after 'y'"));
        }
        self.pos += 1;
        let start = self.pos;
        while matches!(self.peek(), Some(b'0') | Some(b'1')) {
            self.pos += 1;
        }
        let bits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        if self.peek() != Some(b')') {
            return Err(self.error("expected ')' closing the label"));
        }
        self.pos += 1;
        let label = Label::parse(bits)?;
        Ok((label, coeff))
    }

    fn rational(&mut self) -> Result<Rational> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits = self.digits()?;
        let _ = digits;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.digits()?;
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        Rational::parse(text).map_err(|_| Error::Parse {
            position: start,
            message: format!("invalid rational literal \"{text}\""),
        })
    }

    fn digits(&mut self) -> Result<&'a [u8]> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected digits"));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse { position: self.pos, message: message.into() }
    }
}

fn report_output(report: &VerificationReport, json: bool) -> String {
    if json {
        serde_json::to_string_pretty(report).expect("report serializes")
    } else {
        let mut out = format!(
            "campaign {} (seed {}): {} pairs, {} violations, {} ms -> {}\n",
            report.campaign,
            report.seed,
            report.pairs_checked,
            report.violations.len(),
            report.elapsed_ms,
            if report.pass { "PASS" } else { "FAIL" }
        );
        for (check, count) in &report.checks {
            out.push_str(&format!("  {check}: {count}\n"));
        }
        if !report.branch_histogram.is_empty() {
            out.push_str("  branches:\n");
            for (tag, count) in &report.branch_histogram {
                out.push_str(&format!("    {tag}: {count}\n"));
            }
        }
        for v in report.violations.iter().take(10) {
            out.push_str(&format!(
                "  VIOLATION {}: x = {}, s = {}: {}\n",
                v.check, v.x, v.s, v.detail
            ));
        }
        out
    }
}

/// Runs one invocation; returns the rendered output and the exit code.
pub fn run(cli: &Cli) -> Result<(String, i32)> {
    let mode = if cli.sequential { ExecMode::Sequential } else { ExecMode::Parallel };
    let embed_cfg = EmbedConfig { n_max: cli.n_max };
    let campaign_cfg = CampaignConfig {
        embed: embed_cfg,
        max_coeff_index: cli.max_index,
        ..CampaignConfig::default()
    };
    // The built-in universe for selftest and the exhaustive half of cases.
    let universe = [Label::empty(), Label::parse("1").unwrap()];
    let coverage_labels = [
        Label::empty(),
        Label::parse("1").unwrap(),
        Label::parse("101").unwrap(),
    ];
    match &cli.command {
        Command::Encode { expr } => {
            let x = parse_expression(expr)?;
            let code = encoder::encode(&x)?;
            Ok((serde_json::to_string_pretty(&code).unwrap(), 0))
        }
        Command::Eval { expr, approx } => {
            let x = parse_expression(expr)?;
            let value = embedding::eval_raw(&x, &embed_cfg)?;
            let mut out = value.factored();
            if *approx {
                out.push_str(&format!(
                    " (approx {:.12}, inexact)",
                    value.to_rational().approx()
                ));
            }
            if cli.json {
                out = json!({ "value": value.factored() }).to_string();
            }
            Ok((out, 0))
        }
        Command::Gap { x, s } => {
            let x = parse_expression(x)?;
            let s = parse_expression(s)?;
            let gap = verify::gap_raw(&x, &s, &embed_cfg)?;
            let eps_exp = embedding::epsilon_exponent(&x, &embed_cfg)?;
            let at_least = gap.at_least_pow3_neg(eps_exp);
            let out = if cli.json {
                json!({
                    "gap": gap.factored(),
                    "epsilon": format!("1/3^{eps_exp}"),
                    "gap_at_least_epsilon": at_least,
                })
                .to_string()
            } else {
                format!(
                    "gap = {}\nepsilon = 1/3^{eps_exp}\ngap >= epsilon: {at_least}",
                    gap.factored()
                )
            };
            Ok((out, 0))
        }
        Command::Zx { expr } => {
            let x = parse_expression(expr)?;
            let entries = verify::exceptional_listing(&x, &campaign_cfg)?;
            let out = if cli.json {
                serde_json::to_string_pretty(&entries).unwrap()
            } else {
                let mut out = format!("{} elements\n", entries.len());
                for e in &entries {
                    out.push_str(&format!(
                        "  s = {} | distance = {} | gap = {} | predicate = {}\n",
                        e.s, e.distance, e.gap, e.predicate
                    ));
                }
                out
            };
            Ok((out, 0))
        }
        Command::Scan { expr } => {
            let x = parse_expression(expr)?;
            let report =
                verify::containment_campaign(&x, cli.samples, cli.seed, &campaign_cfg, mode)?;
            let code = if report.pass { 0 } else { 1 };
            Ok((report_output(&report, cli.json), code))
        }
        Command::Selftest => {
            let report = verify::exhaustive_lemma_check(&universe, 5, 1_000_000, mode)?;
            let code = if report.pass { 0 } else { 1 };
            Ok((report_output(&report, cli.json), code))
        }
        Command::Cases => {
            let exhaustive = verify::exhaustive_lemma_check(&universe, 5, 1_000_000, mode)?;
            let random = verify::branch_coverage_campaign(
                &coverage_labels,
                cli.max_index,
                cli.samples,
                cli.seed,
                mode,
            )?;
            let pass = exhaustive.pass && random.pass;
            let out = if cli.json {
                json!({
                    "exhaustive": exhaustive,
                    "randomized": random,
                })
                .to_string()
            } else {
                format!(
                    "{}\n{}",
                    report_output(&exhaustive, false),
                    report_output(&random, false)
                )
            };
            Ok((out, if pass { 0 } else { 1 }))
        }
    }
}
