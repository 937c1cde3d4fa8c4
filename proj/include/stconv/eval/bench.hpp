#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stconv/executor.hpp"
#include "stconv/net/spec.hpp"

namespace stconv::eval {

struct BenchRow {
  std::string name;
  std::string input;  // N x C x T x H x W
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
  std::size_t repetitions = 0;
  double median_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
};

/// Times `repetitions` inference forward passes of a randomly initialized
/// network; FLOPs and parameters come from the spec.
BenchRow benchmark_net(const net::NetSpec& spec, std::size_t batch, std::size_t repetitions,
                       const Executor& executor, std::uint64_t seed);

std::string format_bench_csv(const std::vector<BenchRow>& rows);

}  // namespace stconv::eval
