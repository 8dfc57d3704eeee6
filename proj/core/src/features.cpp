#include "fdd/features.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <sstream>

#include "fdd/error.hpp"

namespace fdd {

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t words_for(std::size_t n) { return (n + kWordBits - 1) / kWordBits; }

void check_index(Index i, std::size_t n) {
  if (i == 0 || i > n) {
    throw DomainError("base index " + std::to_string(i) + " outside [1, " + std::to_string(n) + "]");
  }
}

constexpr std::size_t kMaxMaterializedBits = 24;

}  // namespace

// ---------------------------------------------------------------------------
// BaseBits

BaseBits::BaseBits(std::size_t n) : n_(n), words_(words_for(n), 0) {}

BaseBits BaseBits::from_list(std::span<const int> bits) {
  BaseBits out(bits.size());
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] != 0) out.set(static_cast<Index>(k + 1));
  }
  return out;
}

BaseBits BaseBits::from_list(std::initializer_list<int> bits) {
  return from_list(std::span<const int>(bits.begin(), bits.size()));
}

BaseBits BaseBits::from_code(std::uint64_t code, std::size_t n) {
  if (n > kWordBits) throw DomainError("from_code supports at most 64 bits");
  BaseBits out(n);
  if (n > 0) {
    const std::uint64_t mask = n == kWordBits ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    out.words_[0] = code & mask;
  }
  return out;
}

bool BaseBits::test(Index i) const {
  check_index(i, n_);
  const std::size_t b = i - 1;
  return (words_[b / kWordBits] >> (b % kWordBits)) & 1U;
}

void BaseBits::set(Index i, bool value) {
  check_index(i, n_);
  const std::size_t b = i - 1;
  const std::uint64_t bit = std::uint64_t{1} << (b % kWordBits);
  if (value) {
    words_[b / kWordBits] |= bit;
  } else {
    words_[b / kWordBits] &= ~bit;
  }
}

bool BaseBits::none() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

std::size_t BaseBits::count() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::string BaseBits::to_string() const {
  std::string s;
  s.reserve(n_);
  for (std::size_t k = 0; k < n_; ++k) s.push_back(test(static_cast<Index>(k + 1)) ? '1' : '0');
  return s;
}

// ---------------------------------------------------------------------------
// Feature

Feature::Feature(std::vector<Index> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (!indices_.empty() && indices_.front() == 0) {
    throw DomainError("base indices are 1-based; got 0");
  }
  rebuild_mask();
}

Feature::Feature(std::initializer_list<Index> indices) : Feature(std::vector<Index>(indices)) {}

void Feature::rebuild_mask() {
  mask_.assign(indices_.empty() ? 0 : words_for(indices_.back()), 0);
  for (Index i : indices_) {
    const std::size_t b = i - 1;
    mask_[b / kWordBits] |= std::uint64_t{1} << (b % kWordBits);
  }
}

bool Feature::active(const BaseBits& s) const {
  if (max_index() > s.size()) {
    throw DomainError("feature " + to_string() + " exceeds state width " + std::to_string(s.size()));
  }
  return active_unchecked(s);
}

bool Feature::active_unchecked(const BaseBits& s) const noexcept {
  if (indices_.empty()) return s.none();
  const auto words = s.words();
  for (std::size_t w = 0; w < mask_.size(); ++w) {
    if ((words[w] & mask_[w]) != mask_[w]) return false;
  }
  return true;
}

Feature Feature::unite(const Feature& other) const {
  Feature out;
  out.indices_.reserve(indices_.size() + other.indices_.size());
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                 std::back_inserter(out.indices_));
  out.mask_.assign(std::max(mask_.size(), other.mask_.size()), 0);
  for (std::size_t w = 0; w < mask_.size(); ++w) out.mask_[w] |= mask_[w];
  for (std::size_t w = 0; w < other.mask_.size(); ++w) out.mask_[w] |= other.mask_[w];
  return out;
}

bool Feature::contains(const Feature& other) const {
  return std::includes(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end());
}

std::string Feature::to_string() const {
  std::string s = "{";
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (k) s.push_back(',');
    s += std::to_string(indices_[k]);
  }
  s.push_back('}');
  return s;
}

Feature Feature::parse(std::string_view text) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
  };
  text = trim(text);
  if (text.size() < 2 || text.front() != '{' || text.back() != '}') {
    throw DomainError("malformed feature '" + std::string(text) + "'");
  }
  text = trim(text.substr(1, text.size() - 2));
  std::vector<Index> indices;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto token = trim(text.substr(0, comma));
    if (token.empty() || !std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw DomainError("malformed feature index '" + std::string(token) + "'");
    }
    indices.push_back(static_cast<Index>(std::stoul(std::string(token))));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (trim(text).empty()) throw DomainError("trailing comma in feature");
  }
  std::vector<Index> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted != indices) {
    throw DomainError("feature indices must be strictly increasing");
  }
  return Feature(std::move(indices));
}

std::size_t Feature::hash() const noexcept {
  // FNV-1a over the index list.
  std::uint64_t h = 1469598103934665603ULL;
  for (Index i : indices_) {
    h ^= i;
    h *= 1099511628211ULL;
  }
  h ^= indices_.size();
  return static_cast<std::size_t>(h);
}

std::strong_ordering operator<=>(const Feature& a, const Feature& b) noexcept {
  if (auto c = a.indices_.size() <=> b.indices_.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(a.indices_.begin(), a.indices_.end(),
                                                b.indices_.begin(), b.indices_.end());
}

// ---------------------------------------------------------------------------
// FeatureSet

FeatureSet::FeatureSet(std::size_t n, std::vector<Feature> features) : n_(n), features_(std::move(features)) {
  for (const auto& f : features_) check(f);
  std::sort(features_.begin(), features_.end());
  if (std::adjacent_find(features_.begin(), features_.end()) != features_.end()) {
    throw DomainError("duplicate feature in FeatureSet");
  }
}

void FeatureSet::check(const Feature& f) const {
  if (f.max_index() > n_) {
    throw DomainError("feature " + f.to_string() + " exceeds n = " + std::to_string(n_));
  }
}

FeatureSet FeatureSet::base(std::size_t n) {
  FeatureSet out(n);
  out.features_.reserve(n + 1);
  out.features_.emplace_back();
  for (std::size_t i = 1; i <= n; ++i) out.features_.push_back(Feature{static_cast<Index>(i)});
  return out;
}

FeatureSet FeatureSet::singletons(std::size_t n) {
  FeatureSet out(n);
  out.features_.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) out.features_.push_back(Feature{static_cast<Index>(i)});
  return out;
}

FeatureSet FeatureSet::all(std::size_t n) {
  if (n > kMaxMaterializedBits) {
    throw SizeGuardError("F_n materialization limited to n <= 24; got " + std::to_string(n));
  }
  std::vector<Feature> features;
  features.reserve(std::size_t{1} << n);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    std::vector<Index> idx;
    for (std::size_t b = 0; b < n; ++b) {
      if ((code >> b) & 1U) idx.push_back(static_cast<Index>(b + 1));
    }
    features.emplace_back(std::move(idx));
  }
  return FeatureSet(n, std::move(features));
}

bool FeatureSet::contains(const Feature& f) const {
  return std::binary_search(features_.begin(), features_.end(), f);
}

std::optional<std::size_t> FeatureSet::index_of(const Feature& f) const {
  auto it = std::lower_bound(features_.begin(), features_.end(), f);
  if (it == features_.end() || *it != f) return std::nullopt;
  return static_cast<std::size_t>(it - features_.begin());
}

bool FeatureSet::insert(Feature f) {
  check(f);
  auto it = std::lower_bound(features_.begin(), features_.end(), f);
  if (it != features_.end() && *it == f) return false;
  features_.insert(it, std::move(f));
  return true;
}

FeatureSet FeatureSet::with(Feature f) const {
  FeatureSet out = *this;
  out.insert(std::move(f));
  return out;
}

std::string FeatureSet::to_string() const {
  std::string s;
  for (std::size_t j = 0; j < features_.size(); ++j) {
    if (j) s.push_back(' ');
    s += features_[j].to_string();
  }
  return s;
}

FeatureSet FeatureSet::parse(std::string_view text, std::size_t n) {
  std::vector<Feature> features;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find('}', open);
    if (close == std::string_view::npos) throw DomainError("unterminated feature in set");
    features.push_back(Feature::parse(text.substr(open, close - open + 1)));
    pos = close + 1;
  }
  return FeatureSet(n, std::move(features));
}

// ---------------------------------------------------------------------------
// Operators

bool activate(const Feature& f, const BaseBits& s) { return f.active(s); }

std::vector<std::size_t> activate_all(const FeatureSet& chi, const BaseBits& s) {
  if (chi.n() > s.size()) {
    throw DomainError("FeatureSet over " + std::to_string(chi.n()) + " indices, state has " +
                      std::to_string(s.size()) + " bits");
  }
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < chi.size(); ++j) {
    if (chi[j].active_unchecked(s)) active.push_back(j);
  }
  return active;
}

FeatureSet pair(const FeatureSet& chi) {
  std::vector<Feature> out;
  for (std::size_t a = 0; a < chi.size(); ++a) {
    for (std::size_t b = a + 1; b < chi.size(); ++b) {
      Feature u = chi[a].unite(chi[b]);
      if (!chi.contains(u)) out.push_back(std::move(u));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return FeatureSet(chi.n(), std::move(out));
}

FeatureSet full(const FeatureSet& chi) {
  if (chi.n() > kMaxMaterializedBits) {
    throw SizeGuardError("full() limited to n <= 24; got " + std::to_string(chi.n()));
  }
  FeatureSet result = chi;
  FeatureSet level = chi;
  for (std::size_t i = 1; i <= chi.n() && !level.empty(); ++i) {
    level = pair(level);
    for (const auto& f : level) result.insert(f);
  }
  return result;
}

double coverage(const Feature& f, std::span<const BaseBits> states, std::span<const double> weights) {
  if (states.size() != weights.size()) {
    throw DimensionError("coverage: states and weights differ in length");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (f.active(states[k])) total += weights[k];
  }
  return total;
}

double coverage(const Feature& f, std::span<const BaseBits> states) {
  if (states.empty()) throw DomainError("coverage over an empty state set");
  std::vector<double> w(states.size(), 1.0 / static_cast<double>(states.size()));
  return coverage(f, states, w);
}

Eigen::MatrixXd build_phi_matrix(const FeatureSet& chi, std::span<const BaseBits> states) {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states.size()),
                                               static_cast<Eigen::Index>(chi.size()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j : activate_all(chi, states[i])) {
      phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    }
  }
  return phi;
}

BaseBits discretize(std::span<const double> x, std::span<const double> lows,
                    std::span<const double> highs, std::size_t bins_per_dim) {
  if (x.size() != lows.size() || x.size() != highs.size()) {
    throw DimensionError("discretize: x, lows and highs must have equal length");
  }
  if (bins_per_dim < 1) throw DomainError("discretize: bins_per_dim must be >= 1");
  BaseBits out(x.size() * bins_per_dim);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k])) throw DomainError("discretize: non-finite coordinate");
    if (!(lows[k] < highs[k])) throw DomainError("discretize: lows must be below highs");
    const double rel = (x[k] - lows[k]) / (highs[k] - lows[k]) * static_cast<double>(bins_per_dim);
    const double clamped = std::clamp(std::floor(rel), 0.0, static_cast<double>(bins_per_dim - 1));
    out.set(static_cast<Index>(k * bins_per_dim + static_cast<std::size_t>(clamped) + 1));
  }
  return out;
}

std::vector<BaseBits> binary_states(std::size_t n) {
  if (n > kMaxMaterializedBits) {
    throw SizeGuardError("binary_states limited to n <= 24; got " + std::to_string(n));
  }
  std::vector<BaseBits> states;
  states.reserve(std::size_t{1} << n);
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c) states.push_back(BaseBits::from_code(c, n));
  return states;
}

}  // namespace fdd
