// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

// The packaged benchmark_main archive is LTO bytecode tied to another gcc.
#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
