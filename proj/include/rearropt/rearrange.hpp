#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rearropt/field.hpp"

namespace rearropt {

/// Rearrangement class of a generator g0 on equal-measure cells: all
/// permutations of its cell values. Membership is a sorted-multiset match.
struct RearrangementClass {
  Field generator;
  std::vector<double> sorted_desc;  // generator values, nonincreasing
  double bound = 0.0;               // M = max value

  static RearrangementClass from_generator(const Field& g0) {
    if (g0.size() == 0) throw std::invalid_argument("rearrangement class: empty generator");
    if (g0.minCoeff() < 0.0)
      throw std::invalid_argument("rearrangement class: generator must be nonnegative");
    if (g0.maxCoeff() <= 0.0)
      throw std::invalid_argument("rearrangement class: generator is identically zero");
    RearrangementClass c;
    c.generator = g0;
    c.sorted_desc.assign(g0.data(), g0.data() + g0.size());
    std::sort(c.sorted_desc.begin(), c.sorted_desc.end(), std::greater<double>());
    c.bound = c.sorted_desc.front();
    return c;
  }

  int size() const { return static_cast<int>(sorted_desc.size()); }

  bool membership(const Field& g, double tol = 1e-12) const {
    if (g.size() != generator.size()) return false;
    std::vector<double> s(g.data(), g.data() + g.size());
    std::sort(s.begin(), s.end(), std::greater<double>());
    for (std::size_t i = 0; i < s.size(); ++i)
      if (std::abs(s[i] - sorted_desc[i]) > tol) return false;
    return true;
  }
};

/// Hardy-Littlewood maximizer of  g -> sum_i g_i w_i mu  over the class:
/// largest generator values onto the largest entries of w. Ties in w are
/// broken by ascending cell index, so the result is deterministic.
inline Field maximize_linear(const RearrangementClass& cls, const Field& w) {
  const int n = cls.size();
  if (w.size() != n) throw std::invalid_argument("maximize_linear: size mismatch");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return w[a] > w[b]; });
  Field g(n);
  for (int k = 0; k < n; ++k) g[idx[k]] = cls.sorted_desc[k];
  return g;
}

/// Checkable form of "g is a nondecreasing function of w": no order reversal
/// beyond tol on any pair.
inline bool is_comonotone(const Field& g, const Field& w, double tol) {
  const int n = static_cast<int>(g.size());
  if (w.size() != n) throw std::invalid_argument("is_comonotone: size mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w[i] - w[j] > tol && g[i] < g[j] - tol) return false;
  return true;
}

namespace detail {

inline double distinct_permutation_count(std::vector<double> vals) {
  std::sort(vals.begin(), vals.end());
  double count = 1.0;
  // multinomial n! / prod(k_v!) accumulated incrementally: after placing the
  // i-th value, multiply by (i+1) and divide by the run length of its group.
  std::size_t run = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    run = (i > 0 && vals[i] == vals[i - 1]) ? run + 1 : 1;
    count *= static_cast<double>(i + 1) / static_cast<double>(run);
  }
  return count;
}

}  // namespace detail

/// All distinct rearrangements of the generator, lexicographic order.
inline std::vector<Field> enumerate_class(const RearrangementClass& cls, double cap = 1e5) {
  std::vector<double> vals(cls.sorted_desc.rbegin(), cls.sorted_desc.rend());
  const double count = detail::distinct_permutation_count(vals);
  if (count > cap)
    throw std::runtime_error("enumerate_class: " + std::to_string(count) +
                                " rearrangements exceed the cap of " + std::to_string(cap));
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(count));
  do {
    out.push_back(Eigen::Map<const Field>(vals.data(), vals.size()));
  } while (std::next_permutation(vals.begin(), vals.end()));
  return out;
}

/// Element of the weak*-closure surrogate: an explicit convex combination of
/// class members. in_class is false exactly on strict closure elements.
struct ClosureElement {
  Field values;
  bool in_class = false;
};

inline ClosureElement mixture(const RearrangementClass& cls, const std::vector<Field>& members,
                              const std::vector<double>& theta) {
  if (members.empty() || members.size() != theta.size())
    throw std::invalid_argument("mixture: members/theta size mismatch");
  double sum = 0.0;
  for (double t : theta) {
    if (t < 0.0) throw std::invalid_argument("mixture: negative simplex weight");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("mixture: theta does not sum to 1");
  Field v = Field::Zero(cls.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (!cls.membership(members[k]))
      throw std::invalid_argument("mixture: member " + std::to_string(k) +
                                  " is not in the rearrangement class");
    v += theta[k] * members[k];
  }
  const bool in_class = cls.membership(v);
  return {std::move(v), in_class};
}

/// Generator presets used by the CLI config.
inline Field binary_generator(int n, double fraction, double value = 1.0) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("binary generator: fraction must be in (0, 1]");
  const int k = std::max(1, static_cast<int>(std::lround(fraction * n)));
  Field g = Field::Zero(n);
  for (int i = 0; i < std::min(k, n); ++i) g[i] = value;
  return g;
}

inline Field ramp_generator(int n, double lo, double hi) {
  if (!(lo >= 0.0 && hi >= lo)) throw std::invalid_argument("ramp generator: need 0 <= lo <= hi");
  Field g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * (n == 1 ? 0.0 : double(i) / (n - 1));
  return g;
}

}  // namespace rearropt
