#pragma once

// Brute-force reference implementations used by the tests. They work on
// raw vectors and share no code with the engine beyond the DataTable
// accessors used to pull the raw cells out.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fairhil/data_table.hpp"

namespace oracle {

// Equal-width bins, k = min(k_max, ceil(sqrt(n))), last bin closed.
// Returns -1 for missing cells.
inline std::vector<int> bin_index(const std::vector<double>& x, std::size_t k_max) {
  double lo = INFINITY, hi = -INFINITY;
  std::size_t n = 0;
  for (double v : x) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++n;
  }
  std::vector<int> out(x.size(), -1);
  if (n == 0) return out;
  std::size_t k = 1;
  while (k * k < n) ++k;
  k = std::min(k, k_max);
  if (lo == hi) k = 1;
  const double width = (hi - lo) / static_cast<double>(k);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i])) continue;
    int b = 0;
    for (std::size_t e = 1; e < k; ++e) {
      if (x[i] >= lo + width * static_cast<double>(e)) b = static_cast<int>(e);
    }
    out[i] = b;
  }
  return out;
}

// Group id per row for any column: category code or bin index.
inline std::vector<int> groups_of(const fairhil::Column& col, std::size_t k_max) {
  if (col.is_numeric()) return bin_index({col.numbers().begin(), col.numbers().end()}, k_max);
  std::vector<int> out(col.size());
  for (std::size_t r = 0; r < col.size(); ++r) out[r] = col.is_missing(r) ? -1 : col.code(r);
  return out;
}

struct Rates {
  double pos_p = 0, n_p = 0, pos_u = 0, n_u = 0;
};

// side: 1 privileged, 0 unprivileged, -1 neither. y: 1/0/-1 unknown.
inline Rates count(const std::vector<int>& side, const std::vector<std::int8_t>& y) {
  Rates r;
  for (std::size_t i = 0; i < side.size(); ++i) {
    if (side[i] < 0 || y[i] < 0) continue;
    if (side[i] == 1) {
      r.n_p += 1;
      r.pos_p += y[i];
    } else {
      r.n_u += 1;
      r.pos_u += y[i];
    }
  }
  return r;
}

inline std::optional<double> spd(const std::vector<int>& side, const std::vector<std::int8_t>& y) {
  const Rates r = count(side, y);
  if (r.n_p == 0 || r.n_u == 0) return std::nullopt;
  return r.pos_u / r.n_u - r.pos_p / r.n_p;
}

inline std::optional<double> disparate_impact(const std::vector<int>& side, const std::vector<std::int8_t>& y) {
  const Rates r = count(side, y);
  if (r.n_p == 0 || r.n_u == 0 || r.pos_p == 0) return std::nullopt;
  return (r.pos_u / r.n_u) / (r.pos_p / r.n_p);
}

// Rate of yhat = 1 among rows with label == given, per side.
inline std::optional<double> conditional_diff(const std::vector<int>& side, const std::vector<std::int8_t>& yhat,
                                              const std::vector<std::int8_t>& y, int label) {
  double a_p = 0, n_p = 0, a_u = 0, n_u = 0;
  for (std::size_t i = 0; i < side.size(); ++i) {
    if (side[i] < 0 || yhat[i] < 0 || y[i] != label) continue;
    if (side[i] == 1) {
      n_p += 1;
      a_p += yhat[i];
    } else {
      n_u += 1;
      a_u += yhat[i];
    }
  }
  if (n_p == 0 || n_u == 0) return std::nullopt;
  return a_u / n_u - a_p / n_p;
}

inline std::optional<double> eq_opp(const std::vector<int>& side, const std::vector<std::int8_t>& yhat,
                                    const std::vector<std::int8_t>& y) {
  return conditional_diff(side, yhat, y, 1);
}

inline std::optional<double> avg_odds(const std::vector<int>& side, const std::vector<std::int8_t>& yhat,
                                      const std::vector<std::int8_t>& y) {
  const auto tpr = conditional_diff(side, yhat, y, 1);
  const auto fpr = conditional_diff(side, yhat, y, 0);
  if (!tpr || !fpr) return std::nullopt;
  return 0.5 * (*tpr + *fpr);
}

inline std::optional<double> theil(const std::vector<std::int8_t>& yhat, const std::vector<std::int8_t>& y) {
  std::vector<double> b;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (yhat[i] < 0 || y[i] < 0) continue;
    b.push_back(static_cast<double>(yhat[i] - y[i] + 1));
  }
  if (b.empty()) return std::nullopt;
  double mu = 0;
  for (double v : b) mu += v;
  mu /= static_cast<double>(b.size());
  if (mu == 0) return 0.0;
  double t = 0;
  for (double v : b) {
    if (v > 0) t += (v / mu) * std::log(v / mu);
  }
  return std::max(0.0, t / static_cast<double>(b.size()));
}

inline double spd_range(const std::vector<int>& group, const std::vector<std::int8_t>& y) {
  int g_max = -1;
  for (int g : group) g_max = std::max(g_max, g);
  std::vector<double> pos(static_cast<std::size_t>(g_max + 1), 0), n(pos.size(), 0);
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i] < 0 || y[i] < 0) continue;
    n[static_cast<std::size_t>(group[i])] += 1;
    pos[static_cast<std::size_t>(group[i])] += y[i];
  }
  double lo = INFINITY, hi = -INFINITY;
  int populated = 0;
  for (std::size_t g = 0; g < n.size(); ++g) {
    if (n[g] == 0) continue;
    ++populated;
    lo = std::min(lo, pos[g] / n[g]);
    hi = std::max(hi, pos[g] / n[g]);
  }
  return populated < 2 ? 0.0 : hi - lo;
}

// Textbook one-pass Pearson in long double, with the engine's convention
// for constant vectors.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<long double>(a.size());
  long double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double x = a[i], y = b[i];
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
    sab += x * y;
  }
  const bool const_a = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; });
  const bool const_b = std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; });
  if (const_a || const_b) return a == b ? 1.0 : 0.0;
  const long double num = n * sab - sa * sb;
  const long double den = std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
  return static_cast<double>(std::clamp(num / den, -1.0L, 1.0L));
}

// Random mixed table with a binary target "y" (levels "no" < "yes").
inline fairhil::DataTable random_table(std::mt19937_64& rng, std::size_t rows, std::size_t features,
                                       double missing_rate = 0.05) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<fairhil::Column> cols;
  for (std::size_t f = 0; f < features; ++f) {
    const std::string name = "f" + std::to_string(f);
    if (u(rng) < 0.5) {
      std::vector<double> v(rows);
      const int spread = 1 + static_cast<int>(u(rng) * 40);
      for (auto& x : v) x = u(rng) < missing_rate ? NAN : std::floor(u(rng) * spread) + (u(rng) < 0.3 ? 0.5 : 0.0);
      cols.push_back(fairhil::Column::numeric(name, std::move(v)));
    } else {
      const int levels = 2 + static_cast<int>(u(rng) * 4);
      std::vector<std::optional<std::string>> v(rows);
      for (auto& x : v) {
        if (u(rng) < missing_rate) continue;
        x = std::string(1, static_cast<char>('a' + static_cast<int>(u(rng) * levels)));
      }
      cols.push_back(fairhil::Column::from_labels(name, v));
    }
  }
  std::vector<std::optional<std::string>> y(rows);
  for (std::size_t r = 0; r < rows; ++r) y[r] = std::string(r < 2 ? (r == 0 ? "no" : "yes") : (u(rng) < 0.4 ? "yes" : "no"));
  cols.push_back(fairhil::Column::from_labels("y", y));
  return fairhil::DataTable(std::move(cols)).with_target("y", "yes");
}

}  // namespace oracle
