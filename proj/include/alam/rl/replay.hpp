#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <random>
#include <vector>

namespace alam::rl {

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  double reward = 0.0;
  double cost = 0.0;  // indicator cost at next_state
  Eigen::VectorXd next_state;
  bool done = false;
};

/// Fixed-capacity ring with uniform sampling over current contents.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return full_ ? data_.size() : next_; }
  std::size_t capacity() const { return data_.size(); }
  const Transition& at(std::size_t i) const { return data_[i]; }

  /// Uniform indices with replacement; requires size() >= 1.
  std::vector<std::size_t> sample_indices(int batch, std::mt19937_64& rng) const;

 private:
  std::vector<Transition> data_;
  std::size_t next_ = 0;
  bool full_ = false;
};

}  // namespace alam::rl
