#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "densitylab/errors.hpp"

namespace densitylab {

namespace detail {
class SetNode;
}

/// Value + a priori error bound for a power sum evaluated in normalized
/// units, i.e. sum over selected k <= n of (k/n)^alpha. The bound is zero
/// when every term was summed exactly and carries the Euler-Maclaurin
/// remainder estimate when the block-integral shortcut was taken.
struct PowerSum {
  double value = 0.0;
  double error_bound = 0.0;

  PowerSum& operator+=(const PowerSum& o) {
    value += o.value;
    error_bound += o.error_bound;
    return *this;
  }
};

struct PowerSumOptions {
  /// Progressions longer than this are approximated by the corrected
  /// midpoint integral instead of term-by-term summation.
  std::int64_t exact_term_limit = 100'000;
  /// Hard cap on elements scanned by enumeration fallbacks.
  std::int64_t enumeration_cap = 10'000'000;

  static PowerSumOptions exact() {
    PowerSumOptions o;
    o.exact_term_limit = INT64_MAX;
    return o;
  }
};

/// Structured subset of the positive integers with closed-form counting
/// wherever the structure allows it. Immutable; cheap to copy.
class NatSet {
 public:
  static constexpr std::int64_t kDefaultEnumerationCap = 10'000'000;

  /// {k >= 1 : k mod modulus in residues}; residues live in [0, modulus).
  static NatSet periodic(std::int64_t modulus, std::vector<std::int64_t> residues);
  /// Finite union of half-open integer intervals [a_j, b_j),
  /// 1 <= a_j < b_j <= a_{j+1}.
  static NatSet block_list(std::vector<std::pair<std::int64_t, std::int64_t>> intervals);
  /// Blocks [c_k, ceil(c_k*on)) with c_{k+1} = ceil(c_k*on*off), c_0 = start.
  static NatSet geom_blocks(std::int64_t start, double on_ratio, double off_ratio);
  /// Finite set given by a strictly increasing list of positive integers.
  static NatSet explicit_set(std::vector<std::int64_t> elements);
  static NatSet complement(NatSet inner);
  /// Union of parts certified pairwise disjoint on the prefix [1, 10^4];
  /// throws DisjointnessViolation if the certificate check fails.
  static NatSet disjoint_union(std::vector<NatSet> parts);
  static NatSet intersection(std::vector<NatSet> parts);
  /// All of N; periodic(1, {0}) with nicer printing.
  static NatSet naturals();
  /// Set described only by a membership predicate (used for level sets of
  /// quantized sequences). Counting enumerates with memoized chunks.
  static NatSet from_predicate(std::function<bool(std::int64_t)> pred,
                               std::string label = "<predicate>");

  bool member(std::int64_t k) const;

  /// |A intersect [1, n]|, exact. Closed form for periodic/block structure;
  /// enumeration fallback (subject to cap) for intersections and predicates.
  std::int64_t count(std::int64_t n, std::int64_t cap = kDefaultEnumerationCap) const;

  /// Normalized power sum over A up to n: sum_{k in A, k<=n} (k/n)^alpha.
  PowerSum power_sum(std::int64_t n, double alpha, const PowerSumOptions& opts = {}) const;

  /// A_alpha(n) / N_alpha(n) in [0, 1].
  double power_sum_ratio(std::int64_t n, double alpha, const PowerSumOptions& opts = {}) const;

  /// d(A) when derivable from the structure, absent otherwise.
  std::optional<double> exact_density() const;

  /// Horizons where A(n)/n or window ratios attain structural extremes
  /// (block boundaries and their neighbours), clipped to [1, horizon].
  std::vector<std::int64_t> structural_points(std::int64_t horizon) const;

  /// Canonical expression text (parseable for DSL-constructible sets).
  std::string expr() const;

  const detail::SetNode& node() const { return *node_; }

  explicit NatSet(std::shared_ptr<const detail::SetNode> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<const detail::SetNode> node_;
};

/// N_alpha(n) in normalized units: sum_{k<=n} (k/n)^alpha.
PowerSum nat_power_sum(std::int64_t n, double alpha, const PowerSumOptions& opts = {});

namespace detail {

class SetNode {
 public:
  virtual ~SetNode() = default;
  virtual bool member(std::int64_t k) const = 0;
  virtual std::int64_t count(std::int64_t n, std::int64_t cap) const = 0;
  virtual PowerSum power_sum(std::int64_t n, double alpha,
                             const PowerSumOptions& opts) const = 0;
  virtual std::optional<double> exact_density() const = 0;
  virtual void structural_points(std::int64_t horizon,
                                 std::vector<std::int64_t>& out) const {}
  virtual std::string expr() const = 0;
};

/// Normalized power sum of the arithmetic progression
/// first, first+step, ..., first+(count-1)*step against horizon n.
PowerSum progression_power_sum(std::int64_t first, std::int64_t step,
                               std::int64_t count, double alpha, double n,
                               const PowerSumOptions& opts);

}  // namespace detail

}  // namespace densitylab
