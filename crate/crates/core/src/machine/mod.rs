//! A small concrete machine and exhaustive enumeration of its programs.
//!
//! Programs are bit strings read as a stream of 3-bit opcodes, some with
//! operands:
//!
//! | code  | name | effect |
//! |-------|------|--------|
//! | `000` | HALT | stop |
//! | `001` | OUT0 | append `0` |
//! | `010` | OUT1 | append `1` |
//! | `011` | CPYC | append every remaining condition bit |
//! | `100` | RPT  | read a 4-bit count `k`, append `k` copies of the last output bit |
//! | `101` | RDC  | append the next condition bit |
//! | `110` | NOP  | nothing |
//! | `111` | SKPZ | read a flag bit `b`; if `b = 1` and the last output bit is `0`, skip the next instruction |
//!
//! Each executed instruction costs one step; operand fetches and skipped
//! instructions are free. The condition tape is read once, left to right.
//!
//! The three [`MachineMode`]s differ only in how the end of the program is
//! treated: a self-delimiting run must execute HALT having read every program
//! bit, an end-marked run halts when the bits run out, and a monotone run
//! records its output as it grows and needs no halting at all.

mod complexity;
mod enumerate;

pub use complexity::*;
pub use enumerate::*;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Bumped whenever the instruction semantics change; caches carry it.
pub const ISA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Program(pub BitString);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MachineMode {
    #[serde(rename = "sd")]
    SelfDelimiting,
    #[serde(rename = "em")]
    EndMarked,
    #[serde(rename = "mono")]
    Monotone,
}

impl MachineMode {
    pub fn tag(self) -> &'static str {
        match self {
            MachineMode::SelfDelimiting => "sd",
            MachineMode::EndMarked => "em",
            MachineMode::Monotone => "mono",
        }
    }
}

impl fmt::Display for MachineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MachineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sd" | "self-delim" => Ok(MachineMode::SelfDelimiting),
            "em" | "end-marked" => Ok(MachineMode::EndMarked),
            "mono" | "monotone" => Ok(MachineMode::Monotone),
            other => Err(Error::Parse(format!("unknown machine mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Halted,
    OutOfFuel,
    Fault,
}

impl Status {
    pub fn letter(self) -> char {
        match self {
            Status::Halted => 'H',
            Status::OutOfFuel => 'O',
            Status::Fault => 'F',
        }
    }

    pub fn from_letter(c: &str) -> Result<Self> {
        match c {
            "H" => Ok(Status::Halted),
            "O" => Ok(Status::OutOfFuel),
            "F" => Ok(Status::Fault),
            other => Err(Error::Parse(format!("unknown status letter {other:?}"))),
        }
    }

    /// Preference when two runs of the same program disagree: a halt is final,
    /// a fault is at least conclusive, running out of fuel says nothing.
    fn rank(self) -> u8 {
        match self {
            Status::Halted => 2,
            Status::Fault => 1,
            Status::OutOfFuel => 0,
        }
    }
}

/// One output emission in a monotone run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Emission {
    /// Program bits read when the emitting instruction finished.
    pub consumed: usize,
    /// Output length after the emission.
    pub output_len: usize,
    pub step: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunOutcome {
    pub status: Status,
    pub output: BitString,
    pub consumed: usize,
    pub steps: u64,
    /// Present for monotone runs only.
    pub trace: Option<Vec<Emission>>,
}

impl RunOutcome {
    /// Whether `program` (the program this outcome came from) belongs to the
    /// domain of the mode it was run in.
    pub fn in_domain(&self, mode: MachineMode, program_len: usize) -> bool {
        match mode {
            MachineMode::SelfDelimiting | MachineMode::Monotone => {
                self.status == Status::Halted && self.consumed == program_len
            }
            MachineMode::EndMarked => self.status == Status::Halted,
        }
    }

    /// Program bits read by the time the output first extended `x`, or `None`
    /// if it never did. Needs a monotone trace.
    pub fn consumed_when_extending(&self, x: &BitString) -> Option<usize> {
        if x.is_empty() {
            return Some(0);
        }
        let trace = self.trace.as_ref()?;
        let event = trace.iter().find(|e| e.output_len >= x.len())?;
        x.is_prefix_of(&self.output).then_some(event.consumed)
    }
}

const HALT: u8 = 0b000;
const OUT0: u8 = 0b001;
const OUT1: u8 = 0b010;
const CPYC: u8 = 0b011;
const RPT: u8 = 0b100;
const RDC: u8 = 0b101;
const NOP: u8 = 0b110;
const SKPZ: u8 = 0b111;

struct Tape<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl Tape<'_> {
    /// Reads `n` bits big-endian; on a short read consumes what is left.
    fn read(&mut self, n: usize) -> Option<u8> {
        if self.pos + n > self.bits.len() {
            self.pos = self.bits.len();
            return None;
        }
        let v = self.bits[self.pos..self.pos + n]
            .iter()
            .fold(0u8, |acc, &b| (acc << 1) | b as u8);
        self.pos += n;
        Some(v)
    }

    fn exhausted(&self) -> bool {
        self.pos == self.bits.len()
    }
}

fn operand_width(op: u8) -> usize {
    match op {
        RPT => 4,
        SKPZ => 1,
        _ => 0,
    }
}

/// Executes `program` on `condition` for at most `budget` instructions.
///
/// Deterministic: the same arguments always give the same outcome.
pub fn run(mode: MachineMode, program: &BitString, condition: &BitString, budget: u64) -> RunOutcome {
    let mut tape = Tape { bits: program.bits(), pos: 0 };
    let cond = condition.bits();
    let mut cond_pos = 0usize;
    let mut out = BitString::empty();
    let mut steps = 0u64;
    let mut trace = (mode == MachineMode::Monotone).then(Vec::new);

    let status = loop {
        if mode == MachineMode::EndMarked && tape.exhausted() {
            break Status::Halted;
        }
        if steps >= budget {
            break Status::OutOfFuel;
        }
        let Some(op) = tape.read(3) else { break Status::Fault };
        steps += 1;
        let before = out.len();
        match op {
            HALT => break Status::Halted,
            OUT0 => out.push(false),
            OUT1 => out.push(true),
            CPYC => {
                for &b in &cond[cond_pos..] {
                    out.push(b);
                }
                cond_pos = cond.len();
            }
            RPT => {
                let Some(k) = tape.read(4) else { break Status::Fault };
                let Some(last) = out.last() else { break Status::Fault };
                for _ in 0..k {
                    out.push(last);
                }
            }
            RDC => {
                let Some(&b) = cond.get(cond_pos) else { break Status::Fault };
                cond_pos += 1;
                out.push(b);
            }
            NOP => {}
            SKPZ => {
                let Some(flag) = tape.read(1) else { break Status::Fault };
                if flag == 1 {
                    let Some(last) = out.last() else { break Status::Fault };
                    if !last {
                        // the skipped instruction is fetched with its operands
                        // but not executed
                        if mode == MachineMode::EndMarked && tape.exhausted() {
                            continue;
                        }
                        let Some(next) = tape.read(3) else { break Status::Fault };
                        if tape.read(operand_width(next)).is_none() {
                            break Status::Fault;
                        }
                    }
                }
            }
            _ => unreachable!("3-bit opcode"),
        }
        if let Some(trace) = trace.as_mut() {
            if out.len() > before {
                trace.push(Emission { consumed: tape.pos, output_len: out.len(), step: steps });
            }
        }
    };

    RunOutcome { status, output: out, consumed: tape.pos, steps, trace }
}
