#include "framepred/rng.hpp"

#include <bit>
#include <sstream>

#include "framepred/errors.hpp"

namespace framepred {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(uint64_t seed) : engine_(seed) {}

Rng Rng::stream(uint64_t master_seed, uint64_t stream_id) {
  return Rng(splitmix64(splitmix64(master_seed) ^ (stream_id * 0xd1342543de82ef95ull + 1)));
}

uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

int64_t Rng::uniform_int(int64_t n) {
  if (n <= 0) throw Error("uniform_int: n must be positive");
  const uint64_t un = static_cast<uint64_t>(n);
  if (un == 1) return 0;
  const uint64_t mask = ~0ull >> std::countl_zero(un - 1);
  for (;;) {
    const uint64_t v = next_u64() & mask;
    if (v < un) return static_cast<int64_t>(v);
  }
}

bool Rng::coin() { return (next_u64() & 1ull) != 0; }

std::string Rng::save_state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::load_state(const std::string& state) {
  std::istringstream is(state);
  is >> engine_;
  if (is.fail()) throw DataError("invalid RNG state string");
}

}  // namespace framepred
