#pragma once

#include <cstdint>

namespace opttomo {

// Counter-keyed stream generator: the sequence for (seed, stream) is a pure
// function of both, so per-pixel streams give schedule-independent noise.
class StreamRng {
public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform01();  // in (0, 1)
  std::uint64_t poisson(double lambda);

private:
  std::uint64_t state_;
};

}  // namespace opttomo
