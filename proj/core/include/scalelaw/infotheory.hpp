#ifndef SCALELAW_INFOTHEORY_HPP
#define SCALELAW_INFOTHEORY_HPP

// Exact discrete information quantities over dense joint tables. All values
// are in nats; 0 log 0 is taken as 0.

#include <cstddef>
#include <span>
#include <vector>

namespace scalelaw {

inline constexpr std::size_t kMaxAlphabet = 4096;

// p(x, y), row-major |X| x |Y|.
class DiscreteJoint {
 public:
  // Throws Error(kDomain) unless entries are non-negative and sum to 1 within 1e-12.
  DiscreteJoint(std::size_t rows, std::size_t cols, std::vector<double> probs);

  // Normalizes non-negative weights with a positive total.
  static DiscreteJoint from_weights(std::size_t rows, std::size_t cols, std::vector<double> weights);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t x, std::size_t y) const noexcept { return probs_[x * cols_ + y]; }
  std::span<const double> probs() const noexcept { return probs_; }

  std::vector<double> marginal_x() const;
  std::vector<double> marginal_y() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> probs_;
};

// Deterministic map on X: symbol x goes to map()[x].
class DeterministicChannel {
 public:
  explicit DeterministicChannel(std::vector<std::size_t> map);

  static DeterministicChannel identity(std::size_t n);

  std::size_t input_size() const noexcept { return map_.size(); }
  std::size_t output_size() const noexcept { return output_size_; }
  std::size_t operator()(std::size_t x) const noexcept { return map_[x]; }
  std::span<const std::size_t> map() const noexcept { return map_; }

  bool is_injective() const;

 private:
  std::vector<std::size_t> map_;
  std::size_t output_size_;
};

// outer o inner: x -> outer(inner(x)).
DeterministicChannel compose(const DeterministicChannel& outer, const DeterministicChannel& inner);

double entropy(std::span<const double> p);
double joint_entropy(const DiscreteJoint& joint);

double mutual_information(const DiscreteJoint& joint);

// H(Y | X), the Bayes-optimal log-loss for predicting Y from X.
double conditional_entropy(const DiscreteJoint& joint);

// Accuracy of the maximum-posterior predictor of Y from X under 0-1 loss.
double bayes_accuracy(const DiscreteJoint& joint);

// Joint of (T(X), Y); rows that map together are summed.
DiscreteJoint apply_channel(const DiscreteJoint& joint, const DeterministicChannel& channel);

// I(T(X); Y) / I(X; Y). Throws Error(kUndefinedResolution) when I(X; Y) = 0.
double rho_of_channel(const DiscreteJoint& joint, const DeterministicChannel& channel);

// H(Y | T(X)) - H(Y | X) = I(X; Y) - I(T(X); Y): excess Bayes log-loss
// caused by the channel.
double ceiling_gap(const DiscreteJoint& joint, const DeterministicChannel& channel);

}  // namespace scalelaw

#endif  // SCALELAW_INFOTHEORY_HPP
