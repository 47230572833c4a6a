#include "scalelaw/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "scalelaw/error.hpp"

namespace scalelaw {

namespace {

void check_shape(std::size_t rows, std::size_t cols, std::size_t size) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::kDomain, "joint must have non-empty alphabets");
  if (rows > kMaxAlphabet || cols > kMaxAlphabet)
    throw Error(ErrorCode::kDomain,
                "alphabet exceeds " + std::to_string(kMaxAlphabet) + " symbols");
  if (rows * cols != size) throw Error(ErrorCode::kDomain, "joint size does not match its shape");
}

// p log p with 0 log 0 = 0.
double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

DiscreteJoint::DiscreteJoint(std::size_t rows, std::size_t cols, std::vector<double> probs)
    : rows_(rows), cols_(cols), probs_(std::move(probs)) {
  check_shape(rows_, cols_, probs_.size());
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw Error(ErrorCode::kDomain, "joint entries must be finite and non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(ErrorCode::kDomain, "joint entries must sum to 1");
}

DiscreteJoint DiscreteJoint::from_weights(std::size_t rows, std::size_t cols,
                                          std::vector<double> weights) {
  check_shape(rows, cols, weights.size());
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::kDomain, "weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kDomain, "weights must have a positive total");
  for (double& w : weights) w /= total;
  // Absorb the normalization rounding into the largest cell.
  const double residual = 1.0 - std::accumulate(weights.begin(), weights.end(), 0.0);
  *std::max_element(weights.begin(), weights.end()) += residual;
  return DiscreteJoint(rows, cols, std::move(weights));
}

std::vector<double> DiscreteJoint::marginal_x() const {
  std::vector<double> m(rows_, 0.0);
  for (std::size_t x = 0; x < rows_; ++x)
    for (std::size_t y = 0; y < cols_; ++y) m[x] += (*this)(x, y);
  return m;
}

std::vector<double> DiscreteJoint::marginal_y() const {
  std::vector<double> m(cols_, 0.0);
  for (std::size_t x = 0; x < rows_; ++x)
    for (std::size_t y = 0; y < cols_; ++y) m[y] += (*this)(x, y);
  return m;
}

DeterministicChannel::DeterministicChannel(std::vector<std::size_t> map) : map_(std::move(map)) {
  if (map_.empty()) throw Error(ErrorCode::kDomain, "channel must map at least one symbol");
  output_size_ = *std::max_element(map_.begin(), map_.end()) + 1;
  if (output_size_ > kMaxAlphabet)
    throw Error(ErrorCode::kDomain, "channel output alphabet too large");
}

DeterministicChannel DeterministicChannel::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return DeterministicChannel(std::move(m));
}

bool DeterministicChannel::is_injective() const {
  std::vector<bool> hit(output_size_, false);
  for (std::size_t v : map_) {
    if (hit[v]) return false;
    hit[v] = true;
  }
  return true;
}

DeterministicChannel compose(const DeterministicChannel& outer, const DeterministicChannel& inner) {
  if (inner.output_size() > outer.input_size())
    throw Error(ErrorCode::kDomain, "outer channel does not cover the inner channel's image");
  std::vector<std::size_t> m(inner.input_size());
  for (std::size_t x = 0; x < m.size(); ++x) m[x] = outer(inner(x));
  return DeterministicChannel(std::move(m));
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) h -= plogp(v);
  return std::max(h, 0.0);
}

double joint_entropy(const DiscreteJoint& joint) { return entropy(joint.probs()); }

double mutual_information(const DiscreteJoint& joint) {
  const auto px = joint.marginal_x();
  const auto py = joint.marginal_y();
  double mi = 0.0;
  for (std::size_t x = 0; x < joint.rows(); ++x) {
    for (std::size_t y = 0; y < joint.cols(); ++y) {
      const double p = joint(x, y);
      if (p > 0.0) mi += p * std::log(p / (px[x] * py[y]));
    }
  }
  return std::max(mi, 0.0);
}

double conditional_entropy(const DiscreteJoint& joint) {
  const auto px = joint.marginal_x();
  double h = 0.0;
  for (std::size_t x = 0; x < joint.rows(); ++x) {
    for (std::size_t y = 0; y < joint.cols(); ++y) {
      const double p = joint(x, y);
      if (p > 0.0) h -= p * std::log(p / px[x]);
    }
  }
  return std::max(h, 0.0);
}

double bayes_accuracy(const DiscreteJoint& joint) {
  std::vector<double> row_max(joint.rows(), 0.0);
  for (std::size_t x = 0; x < joint.rows(); ++x)
    for (std::size_t y = 0; y < joint.cols(); ++y) row_max[x] = std::max(row_max[x], joint(x, y));
  // Summing in sorted order makes the result invariant to row relabeling.
  std::sort(row_max.begin(), row_max.end());
  return std::accumulate(row_max.begin(), row_max.end(), 0.0);
}

DiscreteJoint apply_channel(const DiscreteJoint& joint, const DeterministicChannel& channel) {
  if (channel.input_size() < joint.rows())
    throw Error(ErrorCode::kDomain, "channel does not map every symbol of X (symbol " +
                                        std::to_string(channel.input_size()) + " unmapped)");
  const std::size_t out_rows = channel.output_size();
  std::vector<double> merged(out_rows * joint.cols(), 0.0);
  for (std::size_t x = 0; x < joint.rows(); ++x) {
    const std::size_t tx = channel(x);
    for (std::size_t y = 0; y < joint.cols(); ++y) merged[tx * joint.cols() + y] += joint(x, y);
  }
  return DiscreteJoint(out_rows, joint.cols(), std::move(merged));
}

double rho_of_channel(const DiscreteJoint& joint, const DeterministicChannel& channel) {
  const double before = mutual_information(joint);
  if (!(before > 0.0))
    throw Error(ErrorCode::kUndefinedResolution, "I(X;Y) = 0: information resolution is undefined");
  const DiscreteJoint image = apply_channel(joint, channel);
  // Relabeling preserves I(X;Y) exactly; only summation order would differ.
  if (channel.is_injective()) return 1.0;
  return mutual_information(image) / before;
}

double ceiling_gap(const DiscreteJoint& joint, const DeterministicChannel& channel) {
  const DiscreteJoint image = apply_channel(joint, channel);
  if (channel.is_injective()) return 0.0;
  const double gap = conditional_entropy(image) - conditional_entropy(joint);
  return std::max(gap, 0.0);
}

}  // namespace scalelaw
