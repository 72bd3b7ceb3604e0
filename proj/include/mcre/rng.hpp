#pragma once

#include <cstdint>
#include <random>

namespace mcre {

// One reproducible random stream. The pair (master_seed, stream_index) fully
// determines the output sequence; replications use distinct stream indices.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  // Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  double student_t(double dof);
  std::uint64_t next_u64() { return engine_(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // A child stream derived deterministically from this stream's identity.
  RngStream child(std::uint64_t tag) const;

  std::mt19937_64& engine() { return engine_; }

 private:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index, std::uint64_t tag);

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mcre
