#pragma once

// Binary conjunctive features over base-feature indices.
//
// Base indices are 1-based, matching the usual {1..n} notation for the
// coordinates of the binary state encoding. A Feature is a set of indices
// and is active in a state iff every named bit is set. The empty set is the
// null feature, active iff no base bit is set at all.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fdd {

using Index = std::uint32_t;

/// Fixed-length bit vector holding the base-feature values of one state.
class BaseBits {
 public:
  BaseBits() = default;
  explicit BaseBits(std::size_t n);

  /// Builds from a 0/1 list; any nonzero entry counts as set.
  static BaseBits from_list(std::span<const int> bits);
  static BaseBits from_list(std::initializer_list<int> bits);
  /// Bit i (1-based) taken from bit i-1 of `code`.
  static BaseBits from_code(std::uint64_t code, std::size_t n);

  std::size_t size() const noexcept { return n_; }
  bool test(Index i) const;
  void set(Index i, bool value = true);
  bool none() const noexcept;
  std::size_t count() const noexcept;

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  std::string to_string() const;

  friend bool operator==(const BaseBits&, const BaseBits&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// A conjunction of base indices; the empty conjunction is the null feature.
class Feature {
 public:
  Feature() = default;
  /// Indices are sorted and deduplicated; zero is rejected.
  explicit Feature(std::vector<Index> indices);
  Feature(std::initializer_list<Index> indices);

  static Feature null() { return Feature{}; }

  bool is_null() const noexcept { return indices_.empty(); }
  std::size_t order() const noexcept { return indices_.size(); }
  std::span<const Index> indices() const noexcept { return indices_; }
  Index max_index() const noexcept { return indices_.empty() ? 0 : indices_.back(); }

  /// Conjunction semantics. Throws DomainError when an index exceeds s.size().
  bool active(const BaseBits& s) const;
  /// Same as active() without the range check; caller guarantees max_index() <= s.size().
  bool active_unchecked(const BaseBits& s) const noexcept;

  Feature unite(const Feature& other) const;
  bool contains(const Feature& other) const;

  /// `{1,3}`; `{}` for the null feature.
  std::string to_string() const;
  static Feature parse(std::string_view text);

  std::size_t hash() const noexcept;

  friend bool operator==(const Feature& a, const Feature& b) noexcept {
    return a.indices_ == b.indices_;
  }
  /// Canonical order: cardinality ascending, then lexicographic on indices.
  friend std::strong_ordering operator<=>(const Feature& a, const Feature& b) noexcept;

 private:
  void rebuild_mask();

  std::vector<Index> indices_;
  std::vector<std::uint64_t> mask_;
};

struct FeatureHash {
  std::size_t operator()(const Feature& f) const noexcept { return f.hash(); }
};

/// Ordered collection of distinct features over n base indices, always kept
/// in canonical order. Column j of Phi corresponds to (*this)[j].
class FeatureSet {
 public:
  FeatureSet() = default;
  explicit FeatureSet(std::size_t n) : n_(n) {}
  FeatureSet(std::size_t n, std::vector<Feature> features);

  /// B_n: the null feature plus every singleton.
  static FeatureSet base(std::size_t n);
  /// The singletons {1}..{n}, without the null feature.
  static FeatureSet singletons(std::size_t n);
  /// F_n: every subset of {1..n}. Guarded at n <= 24.
  static FeatureSet all(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return features_.size(); }
  bool empty() const noexcept { return features_.empty(); }
  const Feature& operator[](std::size_t j) const { return features_[j]; }
  auto begin() const noexcept { return features_.begin(); }
  auto end() const noexcept { return features_.end(); }
  const std::vector<Feature>& features() const noexcept { return features_; }

  bool contains(const Feature& f) const;
  std::optional<std::size_t> index_of(const Feature& f) const;
  /// Inserts at the canonical position; returns false if already present.
  bool insert(Feature f);
  FeatureSet with(Feature f) const;

  /// Space separated feature tokens, e.g. `{} {1} {2} {1,2}`.
  std::string to_string() const;
  static FeatureSet parse(std::string_view text, std::size_t n);

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  void check(const Feature& f) const;

  std::size_t n_ = 0;
  std::vector<Feature> features_;
};

/// Plain conjunction activation with range checking.
bool activate(const Feature& f, const BaseBits& s);

/// Positions j in chi with chi[j] active in s, ascending.
std::vector<std::size_t> activate_all(const FeatureSet& chi, const BaseBits& s);

/// { f ∪ g | f, g ∈ chi, f ∪ g ∉ chi }.
FeatureSet pair(const FeatureSet& chi);

/// Union of pair^i(chi) for i = 0..n, where pair^i is i-fold composition.
/// Guarded at n <= 24; the cost is quadratic in the size of each level.
FeatureSet full(const FeatureSet& chi);

/// Total weight of the states in which f is active.
double coverage(const Feature& f, std::span<const BaseBits> states, std::span<const double> weights);
/// Uniform weights over `states`.
double coverage(const Feature& f, std::span<const BaseBits> states);

/// |states| x |chi| 0/1 matrix.
Eigen::MatrixXd build_phi_matrix(const FeatureSet& chi, std::span<const BaseBits> states);

/// One-hot binning of each coordinate into `bins_per_dim` bins, clamped at
/// the bounds. Dimension k occupies indices k*bins+1 .. (k+1)*bins.
BaseBits discretize(std::span<const double> x, std::span<const double> lows,
                    std::span<const double> highs, std::size_t bins_per_dim);

/// All 2^n binary states, state code c mapping to bit i = (c >> (i-1)) & 1.
std::vector<BaseBits> binary_states(std::size_t n);

}  // namespace fdd

template <>
struct std::hash<fdd::Feature> {
  std::size_t operator()(const fdd::Feature& f) const noexcept { return f.hash(); }
};
