#include "stconv/eval/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "stconv/net/accounting.hpp"
#include "stconv/net/network.hpp"
#include "stconv/rng.hpp"

namespace stconv::eval {

BenchRow benchmark_net(const net::NetSpec& spec, std::size_t batch, std::size_t repetitions,
                       const Executor& executor, std::uint64_t seed) {
  require(batch >= 1 && repetitions >= 1, ErrorCode::invalid_config,
          "batch and repetitions must be >= 1");
  Rng rng(seed);
  net::Network net(spec, rng);
  net.set_executor(&executor);
  Shape shape{batch};
  const Shape sample = spec.input.sample_shape();
  shape.insert(shape.end(), sample.begin(), sample.end());
  const Tensor input = fill_uniform(shape, 0.f, 1.f, rng);

  std::vector<double> ms;
  for (std::size_t r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const Tensor out = net.forward(input, nn::Mode::infer);
    const auto t1 = std::chrono::steady_clock::now();
    require(out.all_finite(), ErrorCode::degenerate, spec.name + ": non-finite output");
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  BenchRow row;
  row.name = spec.name;
  row.input = shape_to_string(shape);
  row.params = net::count_params(spec);
  row.flops = net::count_flops(spec, batch);
  row.repetitions = repetitions;
  const std::size_t n = ms.size();
  row.median_ms = n % 2 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
  row.min_ms = ms.front();
  row.max_ms = ms.back();
  return row;
}

std::string format_bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "name,input,params,flops,repetitions,median_ms,min_ms,max_ms\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.3f,%.3f,%.3f\n", r.repetitions, r.median_ms, r.min_ms,
                  r.max_ms);
    out << r.name << ',' << r.input << ',' << r.params << ',' << r.flops << ',' << buf;
  }
  return out.str();
}

}  // namespace stconv::eval
