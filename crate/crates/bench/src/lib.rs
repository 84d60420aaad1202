//! Benchmark harness for ssc-core; see benches/.
