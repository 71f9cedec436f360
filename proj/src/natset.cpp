#include "densitylab/natset.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "densitylab/detail/numfmt.hpp"

namespace densitylab {

namespace detail {
namespace {

constexpr std::int64_t kDisjointCertificatePrefix = 10'000;

// Integers in [1, n] congruent to r (mod m), 0 <= r < m.
std::int64_t residue_count(std::int64_t m, std::int64_t r, std::int64_t n) {
  if (n <= 0) return 0;
  if (r == 0) return n / m;
  if (n < r) return 0;
  return (n - r) / m + 1;
}

// Size of [a, b) clipped to [1, n].
std::int64_t interval_count(std::int64_t a, std::int64_t b, std::int64_t n) {
  return std::max<std::int64_t>(0, std::min(b, n + 1) - a);
}

double pow_ratio(double k, double n, double alpha) {
  // (k/n)^alpha with k <= n; underflows harmlessly for large alpha.
  return std::pow(k / n, alpha);
}

// d/dt (t/n)^alpha and the third derivative, used for the integral
// approximation's correction and remainder.
double f_prime(double t, double n, double alpha) {
  return alpha / n * std::pow(t / n, alpha - 1.0);
}

double f_third(double t, double n, double alpha) {
  return alpha * (alpha - 1.0) * (alpha - 2.0) / (n * n * n) *
         std::pow(t / n, alpha - 3.0);
}

// Integral of (t/n)^alpha over [lo, hi], 0 <= lo <= hi.
double pow_integral(double lo, double hi, double n, double alpha) {
  const double p = alpha + 1.0;
  return n / p * (std::pow(hi / n, p) - std::pow(lo / n, p));
}

}  // namespace

PowerSum progression_power_sum(std::int64_t first, std::int64_t step,
                               std::int64_t count, double alpha, double n,
                               const PowerSumOptions& opts) {
  if (count <= 0) return {};
  if (alpha == 0.0) return {static_cast<double>(count), 0.0};

  auto exact_range = [&](std::int64_t j_begin, std::int64_t j_end) {
    double s = 0.0;
    for (std::int64_t j = j_begin; j < j_end; ++j)
      s += pow_ratio(static_cast<double>(first + j * step), n, alpha);
    return s;
  };

  if (count <= std::max<std::int64_t>(opts.exact_term_limit, 16)) {
    return {exact_range(0, count), 0.0};
  }

  // Corrected midpoint rule for the interior; the first/last few terms are
  // summed exactly so the integrand stays away from t = 0 and the remainder
  // estimate is valid.
  const std::int64_t edge = 8;
  double s = exact_range(0, edge) + exact_range(count - edge, count);

  const double h = static_cast<double>(step);
  const double a = static_cast<double>(first + edge * step);
  const std::int64_t terms = count - 2 * edge;
  const double lo = a - h / 2.0;
  const double hi = a + (static_cast<double>(terms) - 0.5) * h;

  const double integral = pow_integral(lo, hi, n, alpha) / h;
  const double correction =
      -(h / 24.0) * (f_prime(hi, n, alpha) - f_prime(lo, n, alpha));
  const double remainder =
      7.0 * h * h * h / 5760.0 *
      std::abs(f_third(hi, n, alpha) - f_third(lo, n, alpha));

  return {s + integral + correction, remainder + std::abs(correction) * 1e-10};
}

namespace {

// ---------------------------------------------------------------------------
// Node implementations
// ---------------------------------------------------------------------------

class PeriodicNode final : public SetNode {
 public:
  PeriodicNode(std::int64_t modulus, std::vector<std::int64_t> residues, bool naturals_alias)
      : m_(modulus), residues_(std::move(residues)), naturals_alias_(naturals_alias) {}

  bool member(std::int64_t k) const override {
    return std::binary_search(residues_.begin(), residues_.end(), k % m_);
  }

  std::int64_t count(std::int64_t n, std::int64_t) const override {
    std::int64_t c = 0;
    for (std::int64_t r : residues_) c += residue_count(m_, r, n);
    return c;
  }

  PowerSum power_sum(std::int64_t n, double alpha,
                     const PowerSumOptions& opts) const override {
    PowerSum total;
    for (std::int64_t r : residues_) {
      const std::int64_t first = (r == 0) ? m_ : r;
      if (first > n) continue;
      const std::int64_t cnt = (n - first) / m_ + 1;
      total += progression_power_sum(first, m_, cnt, alpha, static_cast<double>(n), opts);
    }
    return total;
  }

  std::optional<double> exact_density() const override {
    return static_cast<double>(residues_.size()) / static_cast<double>(m_);
  }

  std::string expr() const override {
    std::string s = "mod(" + std::to_string(m_) + ";";
    for (std::size_t i = 0; i < residues_.size(); ++i)
      s += (i ? "," : "") + std::to_string(residues_[i]);
    return s + ")";
  }

  std::int64_t modulus() const { return m_; }
  bool is_naturals() const { return naturals_alias_ && residues_.size() == 1 && m_ == 1; }

 private:
  std::int64_t m_;
  std::vector<std::int64_t> residues_;  // sorted
  bool naturals_alias_;
};

// Shared machinery for finite-or-lazy block unions.
class BlockBase : public SetNode {
 public:
  bool member(std::int64_t k) const override {
    const auto& b = blocks();
    auto it = std::upper_bound(b.begin(), b.end(), k,
                               [](std::int64_t v, const auto& blk) { return v < blk.first; });
    if (it == b.begin()) return false;
    --it;
    return k < it->second;
  }

  std::int64_t count(std::int64_t n, std::int64_t) const override {
    std::int64_t c = 0;
    for (const auto& [a, b] : blocks()) {
      if (a > n) break;
      c += interval_count(a, b, n);
    }
    return c;
  }

  PowerSum power_sum(std::int64_t n, double alpha,
                     const PowerSumOptions& opts) const override {
    PowerSum total;
    for (const auto& [a, b] : blocks()) {
      if (a > n) break;
      const std::int64_t cnt = interval_count(a, b, n);
      total += progression_power_sum(a, 1, cnt, alpha, static_cast<double>(n), opts);
    }
    return total;
  }

  void structural_points(std::int64_t horizon,
                         std::vector<std::int64_t>& out) const override {
    for (const auto& [a, b] : blocks()) {
      if (a > horizon) break;
      out.insert(out.end(), {a - 1, a, b - 1, b});
    }
  }

 protected:
  virtual const std::vector<std::pair<std::int64_t, std::int64_t>>& blocks() const = 0;
};

class BlockListNode final : public BlockBase {
 public:
  explicit BlockListNode(std::vector<std::pair<std::int64_t, std::int64_t>> intervals)
      : intervals_(std::move(intervals)) {}

  std::optional<double> exact_density() const override { return 0.0; }  // finite

  std::string expr() const override {
    std::string s = "blocks(list;";
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      s += (i ? "," : "");
      s += "[" + std::to_string(intervals_[i].first) + "," +
           std::to_string(intervals_[i].second) + ")";
    }
    return s + ")";
  }

 protected:
  const std::vector<std::pair<std::int64_t, std::int64_t>>& blocks() const override {
    return intervals_;
  }

 private:
  std::vector<std::pair<std::int64_t, std::int64_t>> intervals_;
};

class GeomBlocksNode final : public BlockBase {
 public:
  GeomBlocksNode(std::int64_t start, double on_ratio, double off_ratio)
      : start_(start), on_(on_ratio), off_(off_ratio) {
    // Precompute the whole block sequence up to 2^62; the growth ratio
    // keeps the list short.
    constexpr std::int64_t kLimit = std::int64_t{1} << 62;
    constexpr std::size_t kMaxBlocks = 200'000;
    std::int64_t c = start_;
    while (c < kLimit) {
      const auto end = static_cast<std::int64_t>(
          std::ceil(static_cast<double>(c) * on_));
      blocks_.emplace_back(c, std::max(end, c + 1));
      if (blocks_.size() > kMaxBlocks)
        throw SemanticError("geom block ratios too close to 1: block list blows up");
      const double next = static_cast<double>(c) * on_ * off_;
      if (next >= static_cast<double>(kLimit)) break;
      c = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(next)),
                                 blocks_.back().second);
    }
  }

  std::optional<double> exact_density() const override { return std::nullopt; }

  std::string expr() const override {
    return "blocks(geom;" + std::to_string(start_) + "," +
           detail::format_double(on_) + "," + detail::format_double(off_) + ")";
  }

 protected:
  const std::vector<std::pair<std::int64_t, std::int64_t>>& blocks() const override {
    return blocks_;
  }

 private:
  std::int64_t start_;
  double on_, off_;
  std::vector<std::pair<std::int64_t, std::int64_t>> blocks_;
};

class ExplicitNode final : public SetNode {
 public:
  explicit ExplicitNode(std::vector<std::int64_t> elements)
      : elements_(std::move(elements)) {}

  bool member(std::int64_t k) const override {
    return std::binary_search(elements_.begin(), elements_.end(), k);
  }

  std::int64_t count(std::int64_t n, std::int64_t) const override {
    return std::upper_bound(elements_.begin(), elements_.end(), n) - elements_.begin();
  }

  PowerSum power_sum(std::int64_t n, double alpha,
                     const PowerSumOptions&) const override {
    double s = 0.0;
    for (std::int64_t e : elements_) {
      if (e > n) break;
      s += pow_ratio(static_cast<double>(e), static_cast<double>(n), alpha);
    }
    return {s, 0.0};
  }

  std::optional<double> exact_density() const override { return 0.0; }

  void structural_points(std::int64_t horizon,
                         std::vector<std::int64_t>& out) const override {
    for (std::int64_t e : elements_) {
      if (e > horizon) break;
      out.insert(out.end(), {e - 1, e});
    }
  }

  std::string expr() const override {
    std::string s = "explicit(";
    for (std::size_t i = 0; i < elements_.size(); ++i)
      s += (i ? "," : "") + std::to_string(elements_[i]);
    return s + ")";
  }

 private:
  std::vector<std::int64_t> elements_;
};

class ComplementNode final : public SetNode {
 public:
  explicit ComplementNode(NatSet inner) : inner_(std::move(inner)) {}

  bool member(std::int64_t k) const override { return !inner_.member(k); }

  std::int64_t count(std::int64_t n, std::int64_t cap) const override {
    return n - inner_.count(n, cap);
  }

  PowerSum power_sum(std::int64_t n, double alpha,
                     const PowerSumOptions& opts) const override {
    const PowerSum whole = nat_power_sum(n, alpha, opts);
    const PowerSum in = inner_.power_sum(n, alpha, opts);
    return {whole.value - in.value, whole.error_bound + in.error_bound};
  }

  std::optional<double> exact_density() const override {
    if (auto d = inner_.exact_density()) return 1.0 - *d;
    return std::nullopt;
  }

  void structural_points(std::int64_t horizon,
                         std::vector<std::int64_t>& out) const override {
    inner_.node().structural_points(horizon, out);
  }

  std::string expr() const override { return "compl(" + inner_.expr() + ")"; }

 private:
  NatSet inner_;
};

class DisjointUnionNode final : public SetNode {
 public:
  explicit DisjointUnionNode(std::vector<NatSet> parts) : parts_(std::move(parts)) {
    for (std::int64_t k = 1; k <= kDisjointCertificatePrefix; ++k) {
      int hits = 0;
      for (const auto& p : parts_)
        if (p.member(k) && ++hits > 1)
          throw DisjointnessViolation(
              "union parts are not disjoint: " + std::to_string(k) +
              " belongs to more than one part");
    }
  }

  bool member(std::int64_t k) const override {
    for (const auto& p : parts_)
      if (p.member(k)) return true;
    return false;
  }

  std::int64_t count(std::int64_t n, std::int64_t cap) const override {
    std::int64_t c = 0;
    for (const auto& p : parts_) c += p.count(n, cap);
    return c;
  }

  PowerSum power_sum(std::int64_t n, double alpha,
                     const PowerSumOptions& opts) const override {
    PowerSum total;
    for (const auto& p : parts_) total += p.power_sum(n, alpha, opts);
    return total;
  }

  std::optional<double> exact_density() const override {
    double d = 0.0;
    for (const auto& p : parts_) {
      auto pd = p.exact_density();
      if (!pd) return std::nullopt;
      d += *pd;
    }
    return d;
  }

  void structural_points(std::int64_t horizon,
                         std::vector<std::int64_t>& out) const override {
    for (const auto& p : parts_) p.node().structural_points(horizon, out);
  }

  std::string expr() const override {
    // Right-nested binary form, matching the grammar.
    std::string s;
    for (std::size_t i = 0; i + 1 < parts_.size(); ++i)
      s += "union(" + parts_[i].expr() + ",";
    s += parts_.back().expr();
    s.append(parts_.size() - 1, ')');
    return s;
  }

 private:
  std::vector<NatSet> parts_;
};

// Memoized prefix counts in fixed-size chunks; shared by the enumeration
// fallbacks so repeated window queries cost one scan.
class ChunkedCounter {
 public:
  static constexpr std::int64_t kChunk = 1 << 16;

  template <typename Member>
  std::int64_t count(std::int64_t n, std::int64_t cap, Member&& member) const {
    if (n <= 0) return 0;
    if (n > cap) throw EnumerationCapExceeded(n, cap);
    std::lock_guard<std::mutex> lock(mu_);
    const std::int64_t chunk = n / kChunk;  // chunks [0, chunk) fully below n
    while (static_cast<std::int64_t>(cum_.size()) < chunk) {
      const std::int64_t base = static_cast<std::int64_t>(cum_.size()) * kChunk;
      std::int64_t c = cum_.empty() ? 0 : cum_.back();
      for (std::int64_t k = base + 1; k <= base + kChunk; ++k) c += member(k);
      cum_.push_back(c);
    }
    std::int64_t c = chunk > 0 ? cum_[chunk - 1] : 0;
    for (std::int64_t k = chunk * kChunk + 1; k <= n; ++k) c += member(k);
    return c;
  }

 private:
  mutable std::mutex mu_;
  mutable std::vector<std::int64_t> cum_;
};

class IntersectionNode final : public SetNode {
 public:
  explicit IntersectionNode(std::vector<NatSet> parts) : parts_(std::move(parts)) {}

  bool member(std::int64_t k) const override {
    for (const auto& p : parts_)
      if (!p.member(k)) return false;
    return true;
  }

  std::int64_t count(std::int64_t n, std::int64_t cap) const override {
    return counter_.count(n, cap, [this](std::int64_t k) { return member(k); });
  }

  PowerSum power_sum(std::int64_t n, double alpha,
                     const PowerSumOptions& opts) const override {
    if (n > opts.enumeration_cap) throw EnumerationCapExceeded(n, opts.enumeration_cap);
    double s = 0.0;
    for (std::int64_t k = 1; k <= n; ++k)
      if (member(k)) s += pow_ratio(static_cast<double>(k), static_cast<double>(n), alpha);
    return {s, 0.0};
  }

  std::optional<double> exact_density() const override { return std::nullopt; }

  void structural_points(std::int64_t horizon,
                         std::vector<std::int64_t>& out) const override {
    for (const auto& p : parts_) p.node().structural_points(horizon, out);
  }

  std::string expr() const override {
    std::string s;
    for (std::size_t i = 0; i + 1 < parts_.size(); ++i)
      s += "inter(" + parts_[i].expr() + ",";
    s += parts_.back().expr();
    s.append(parts_.size() - 1, ')');
    return s;
  }

 private:
  std::vector<NatSet> parts_;
  ChunkedCounter counter_;
};

class PredicateNode final : public SetNode {
 public:
  PredicateNode(std::function<bool(std::int64_t)> pred, std::string label)
      : pred_(std::move(pred)), label_(std::move(label)) {}

  bool member(std::int64_t k) const override { return pred_(k); }

  std::int64_t count(std::int64_t n, std::int64_t cap) const override {
    return counter_.count(n, cap, pred_);
  }

  PowerSum power_sum(std::int64_t n, double alpha,
                     const PowerSumOptions& opts) const override {
    if (n > opts.enumeration_cap) throw EnumerationCapExceeded(n, opts.enumeration_cap);
    double s = 0.0;
    for (std::int64_t k = 1; k <= n; ++k)
      if (pred_(k)) s += pow_ratio(static_cast<double>(k), static_cast<double>(n), alpha);
    return {s, 0.0};
  }

  std::optional<double> exact_density() const override { return std::nullopt; }

  std::string expr() const override { return label_; }

 private:
  std::function<bool(std::int64_t)> pred_;
  std::string label_;
  ChunkedCounter counter_;
};

}  // namespace
}  // namespace detail

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

NatSet NatSet::periodic(std::int64_t modulus, std::vector<std::int64_t> residues) {
  if (modulus < 1) throw SemanticError("modulus must be >= 1");
  if (residues.empty()) throw SemanticError("periodic set needs at least one residue");
  std::sort(residues.begin(), residues.end());
  if (std::adjacent_find(residues.begin(), residues.end()) != residues.end())
    throw SemanticError("residues must be distinct");
  if (residues.front() < 0 || residues.back() >= modulus)
    throw SemanticError("residues must lie in [0, modulus)");
  return NatSet(std::make_shared<detail::PeriodicNode>(modulus, std::move(residues), false));
}

NatSet NatSet::naturals() {
  return NatSet(std::make_shared<detail::PeriodicNode>(
      1, std::vector<std::int64_t>{0}, true));
}

NatSet NatSet::block_list(std::vector<std::pair<std::int64_t, std::int64_t>> intervals) {
  if (intervals.empty()) throw SemanticError("block list needs at least one interval");
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    auto [a, b] = intervals[i];
    if (a < 1 || b <= a) throw SemanticError("interval bounds must satisfy 1 <= a < b");
    if (i + 1 < intervals.size() && b > intervals[i + 1].first)
      throw SemanticError("intervals overlap or are out of order");
  }
  return NatSet(std::make_shared<detail::BlockListNode>(std::move(intervals)));
}

NatSet NatSet::geom_blocks(std::int64_t start, double on_ratio, double off_ratio) {
  if (start < 1) throw SemanticError("geom start must be >= 1");
  if (!(on_ratio > 1.0) || !(off_ratio > 1.0))
    throw SemanticError("geom ratios must be > 1");
  return NatSet(std::make_shared<detail::GeomBlocksNode>(start, on_ratio, off_ratio));
}

NatSet NatSet::explicit_set(std::vector<std::int64_t> elements) {
  if (elements.empty()) throw SemanticError("explicit set needs at least one element");
  if (elements.front() < 1) throw SemanticError("elements must be positive");
  for (std::size_t i = 0; i + 1 < elements.size(); ++i)
    if (elements[i] >= elements[i + 1])
      throw SemanticError("elements must be strictly increasing");
  return NatSet(std::make_shared<detail::ExplicitNode>(std::move(elements)));
}

NatSet NatSet::complement(NatSet inner) {
  return NatSet(std::make_shared<detail::ComplementNode>(std::move(inner)));
}

NatSet NatSet::disjoint_union(std::vector<NatSet> parts) {
  if (parts.size() < 2) throw SemanticError("union needs at least two parts");
  return NatSet(std::make_shared<detail::DisjointUnionNode>(std::move(parts)));
}

NatSet NatSet::intersection(std::vector<NatSet> parts) {
  if (parts.size() < 2) throw SemanticError("intersection needs at least two parts");
  return NatSet(std::make_shared<detail::IntersectionNode>(std::move(parts)));
}

NatSet NatSet::from_predicate(std::function<bool(std::int64_t)> pred, std::string label) {
  return NatSet(std::make_shared<detail::PredicateNode>(std::move(pred), std::move(label)));
}

// ---------------------------------------------------------------------------
// Forwarders
// ---------------------------------------------------------------------------

bool NatSet::member(std::int64_t k) const { return node_->member(k); }

std::int64_t NatSet::count(std::int64_t n, std::int64_t cap) const {
  if (n <= 0) return 0;
  return node_->count(n, cap);
}

PowerSum NatSet::power_sum(std::int64_t n, double alpha, const PowerSumOptions& opts) const {
  return node_->power_sum(n, alpha, opts);
}

double NatSet::power_sum_ratio(std::int64_t n, double alpha,
                               const PowerSumOptions& opts) const {
  if (alpha == 0.0) {
    return static_cast<double>(count(n, opts.enumeration_cap)) / static_cast<double>(n);
  }
  const PowerSum num = power_sum(n, alpha, opts);
  const PowerSum den = nat_power_sum(n, alpha, opts);
  const double r = num.value / den.value;
  return std::clamp(r, 0.0, 1.0);
}

std::optional<double> NatSet::exact_density() const { return node_->exact_density(); }

std::vector<std::int64_t> NatSet::structural_points(std::int64_t horizon) const {
  std::vector<std::int64_t> pts;
  node_->structural_points(horizon, pts);
  std::erase_if(pts, [horizon](std::int64_t v) { return v < 1 || v > horizon; });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::string NatSet::expr() const { return node_->expr(); }

PowerSum nat_power_sum(std::int64_t n, double alpha, const PowerSumOptions& opts) {
  if (alpha == 0.0) return {static_cast<double>(n), 0.0};
  return detail::progression_power_sum(1, 1, n, alpha, static_cast<double>(n), opts);
}

}  // namespace densitylab
