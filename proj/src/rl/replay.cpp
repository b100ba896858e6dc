#include "alam/rl/replay.hpp"

#include <stdexcept>

namespace alam::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) {
  if (capacity == 0) throw std::invalid_argument("replay: capacity must be positive");
  data_.resize(capacity);
}

void ReplayBuffer::push(Transition t) {
  data_[next_] = std::move(t);
  next_ = (next_ + 1) % data_.size();
  if (next_ == 0) full_ = true;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(int batch, std::mt19937_64& rng) const {
  const std::size_t n = size();
  if (n == 0) throw std::invalid_argument("replay: cannot sample from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

}  // namespace alam::rl
