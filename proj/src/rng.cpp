#include "mcre/rng.hpp"

#include <array>

namespace mcre {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t master, std::uint64_t index, std::uint64_t tag) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(master), hi(master), lo(index), hi(index), lo(tag), hi(tag), 0x6d637265u};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : RngStream(master_seed, stream_index, 0) {}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index, std::uint64_t tag)
    : master_seed_(master_seed),
      stream_index_(stream_index),
      engine_(seeded_engine(master_seed, stream_index, tag)) {}

double RngStream::student_t(double dof) {
  std::student_t_distribution<double> dist(dof);
  return dist(engine_);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

RngStream RngStream::child(std::uint64_t tag) const {
  return RngStream(master_seed_, stream_index_, tag + 1);
}

}  // namespace mcre
