use alloc::string::String;

use crate::lang::{parse_program, Program};

/// Outcomes of `q0 q1 q2` accepted by the classical post-processing.
pub const SHOR_ACCEPT: [&str; 3] = ["010", "001", "011"];

const SHOR: &str = "\
# Order finding for N = 15, a = 11 (p = q0..q2, q = q3..q4)
qubits 5;
init q0, q1, q2;
while measure(q0, q1, q2) in {000, 100, 101, 110, 111} cap 1000 {
  init q0, q1, q2, q3, q4;
  assert A0: span{|00000>} on q0, q1, q2, q3, q4 via {
    check q0, q1, q2, q3, q4;
  };
  H q0;
  H q1;
  H q2;
  assert A1: span{|+++>} (x) span{|00>} on q0, q1, q2, q3, q4 via {
    H q0;
    H q1;
    H q2;
    check q0, q1, q2;
    H q0;
    H q1;
    H q2;
  };
  CNOT q2, q3;
  CNOT q2, q4;
  assert A2: span{|++>} (x) span{|000> + |111>} on q0, q1, q2, q3, q4 via {
    CNOT q2, q3;
    CNOT q2, q4;
    H q2;
    H q0;
    H q1;
    check q0, q1, q2, q3, q4;
    H q1;
    H q0;
    H q2;
    CNOT q2, q4;
    CNOT q2, q3;
  };
  IQFT q0, q1, q2;
  SWAP q0, q2;
  assert A3: span{|000> + |001>} (x) span{|00> + |11>} on q0, q1, q2, q3, q4 via {
    check q0, q1;
    H q2;
    check q2;
    H q2;
  };
}
";

/// Text of the Shor program.
pub fn shor_source() -> String {
    String::from(SHOR)
}

/// The five-qubit order-finding program with assertions `A0`–`A3`.
pub fn build_shor() -> Program {
    parse_program(SHOR).expect("built-in program parses")
}
