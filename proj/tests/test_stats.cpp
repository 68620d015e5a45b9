#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "promptstrata/error.hpp"
#include "promptstrata/stats.hpp"

using namespace promptstrata;

namespace {

struct Brute {
  double w;
  double p;
};

// Enumerates every sign assignment of the non-zero |d| ranks.
Brute brute_force(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  const std::size_t n = d.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(d[j]) < std::fabs(d[i])) ++below;
      if (std::fabs(d[j]) == std::fabs(d[i])) ++equal;
    }
    ranks[i] = below + (equal + 1) / 2.0;
  }
  double t_plus = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += ranks[i];
    if (d[i] > 0) t_plus += ranks[i];
  }
  const double w = std::min(t_plus, total - t_plus);
  std::uint64_t at_most = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += ranks[i];
    if (s <= w + 1e-9) ++at_most;
  }
  const double p = std::min(1.0, 2.0 * static_cast<double>(at_most) / std::ldexp(1.0, static_cast<int>(n)));
  return {w, p};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::BadArgument;
}

RecallTable single_column(const std::vector<std::pair<std::string, double>>& values, const std::string& label) {
  RecallTable t;
  t.plan = {{"name", "x"}, {"axes", {"country"}}};
  t.columns = {label};
  for (const auto& [code, v] : values) t.cells.push_back({{{Axis::Country, code}}, label, v, 0.0, 1});
  return t;
}

}  // namespace

TEST(Wilcoxon, AllNegativeDifferences) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 7};
  const auto r = wilcoxon_signed_rank(a, b);
  EXPECT_EQ(r.w_statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 0.0625);
  EXPECT_EQ(r.method, WilcoxonMethod::ExactEnumeration);
  EXPECT_EQ(r.n_effective, 5u);
  EXPECT_FALSE(r.significant);
  const auto oracle = brute_force(a, b);
  EXPECT_EQ(oracle.w, 0.0);
  EXPECT_DOUBLE_EQ(oracle.p, 0.0625);
}

TEST(Wilcoxon, Errors) {
  const std::vector<double> a{1, 2, 3}, b{1, 2};
  EXPECT_EQ(kind_of([&] { wilcoxon_signed_rank(a, b); }), ErrorKind::LengthMismatch);
  EXPECT_EQ(kind_of([&] { wilcoxon_signed_rank(a, a); }), ErrorKind::AllZeroDifferences);
  const std::vector<double> one{1};
  EXPECT_EQ(kind_of([&] { wilcoxon_signed_rank(one, one); }), ErrorKind::TooFewValues);
  const std::vector<double> nan{1, std::nan("")};
  EXPECT_EQ(kind_of([&] { wilcoxon_signed_rank(nan, b); }), ErrorKind::NonFiniteValue);
}

TEST(Wilcoxon, ResultJson) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 7};
  const auto j = wilcoxon_signed_rank(a, b).to_json();
  EXPECT_EQ(j["n"], 5);
  EXPECT_EQ(j["w"], 0.0);
  EXPECT_EQ(j["p"], 0.0625);
  EXPECT_EQ(j["significant"], false);
  EXPECT_EQ(j["method"], "exact");
  EXPECT_EQ(j["zero_handling"], "drop");
}

TEST(WilcoxonProperty, ExactMatchesBruteForceEnumeration) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> small(-4, 4);  // zeros and ties on purpose
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 13;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = small(rng);
      b[i] = small(rng);
    }
    bool any_diff = false;
    for (std::size_t i = 0; i < n; ++i) any_diff |= a[i] != b[i];
    if (!any_diff) continue;
    const auto r = wilcoxon_signed_rank(a, b, WilcoxonMethod::ExactEnumeration);
    const auto o = brute_force(a, b);
    EXPECT_DOUBLE_EQ(r.w_statistic, o.w);
    EXPECT_NEAR(r.p_value, o.p, 1e-12);
    EXPECT_EQ(r.significant, r.p_value <= 0.05);
  }
}

TEST(WilcoxonProperty, Antisymmetry) {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = g(rng);
      b[i] = g(rng) + 0.3;
    }
    const auto ab = wilcoxon_signed_rank(a, b);
    const auto ba = wilcoxon_signed_rank(b, a);
    EXPECT_EQ(ab.w_statistic, ba.w_statistic);
    EXPECT_EQ(ab.p_value, ba.p_value);
    EXPECT_EQ(ab.t_plus, ba.t_minus);
    EXPECT_EQ(ab.t_minus, ba.t_plus);
  }
}

TEST(WilcoxonProperty, InvariantUnderMonotoneTransformOfDifferences) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 20;
    std::vector<double> d(n), zero(n, 0.0), t(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = g(rng) + 0.2;
    // sign-preserving, strictly increasing in |d|
    for (std::size_t i = 0; i < n; ++i) t[i] = std::copysign(std::exp(3 * std::fabs(d[i])) - 1, d[i]);
    const auto r1 = wilcoxon_signed_rank(d, zero, WilcoxonMethod::ExactEnumeration);
    const auto r2 = wilcoxon_signed_rank(t, zero, WilcoxonMethod::ExactEnumeration);
    EXPECT_EQ(r1.w_statistic, r2.w_statistic);
    EXPECT_EQ(r1.p_value, r2.p_value);
  }
}

TEST(WilcoxonProperty, NormalApproximationCloseToExactAtTwenty) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> g(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(20), b(20);
    const double shift = (trial % 5) * 0.15;
    for (std::size_t i = 0; i < 20; ++i) {
      a[i] = g(rng) + shift;
      b[i] = g(rng);
    }
    const auto exact = wilcoxon_signed_rank(a, b, WilcoxonMethod::ExactEnumeration);
    const auto normal = wilcoxon_signed_rank(a, b, WilcoxonMethod::NormalApproximation);
    ASSERT_EQ(exact.n_effective, 20u);
    worst = std::max(worst, std::fabs(exact.p_value - normal.p_value));
  }
  EXPECT_LE(worst, 0.01);
}

TEST(Wilcoxon, AutoSwitchesAboveTwentyFive) {
  std::vector<double> a(26), b(26, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = (i % 3 == 0 ? -1.0 : 1.0) * static_cast<double>(i + 1);
  EXPECT_EQ(wilcoxon_signed_rank(a, b).method, WilcoxonMethod::NormalApproximation);
  a.pop_back();
  b.pop_back();
  EXPECT_EQ(wilcoxon_signed_rank(a, b).method, WilcoxonMethod::ExactEnumeration);
}

TEST(DeltaSummary, PaperExampleAndSigns) {
  const auto base = single_column({{"BI", 0.224}, {"CM", 0.5}, {"IN", 0.3}}, "default");
  const auto other = single_column({{"BI", 0.202}, {"CM", 0.5}, {"IN", 0.4}}, "translated:avg");
  const auto rows = delta_summary(base, other);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].delta * 100, -2.2, 1e-9);
  EXPECT_EQ(rows[0].sign, '-');
  EXPECT_EQ(rows[1].sign, '0');
  EXPECT_EQ(rows[2].sign, '+');
  for (const auto& r : rows) EXPECT_EQ(r.delta, r.intervention - r.baseline);
  for (const auto& r : delta_summary(base, base)) EXPECT_EQ(r.delta, 0.0);
}

TEST(DeltaSummary, GroupMismatch) {
  const auto base = single_column({{"BI", 0.2}, {"CM", 0.5}}, "default");
  const auto other = single_column({{"BI", 0.2}, {"IN", 0.5}}, "x");
  EXPECT_EQ(kind_of([&] { delta_summary(base, other); }), ErrorKind::GroupMismatch);
}

TEST(DeltaSummary, MatchesSubtractionOracle) {
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> u(0, 1);
  const std::vector<std::string> codes{"BI", "CM", "CN", "FR", "IN", "PE"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, double>> x, y;
    for (const auto& c : codes) {
      x.push_back({c, u(rng)});
      y.push_back({c, u(rng)});
    }
    const auto rows = delta_summary(single_column(x, "default"), single_column(y, "z"));
    ASSERT_EQ(rows.size(), codes.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_EQ(rows[i].delta, y[i].second - x[i].second);
      EXPECT_EQ(rows[i].sign, rows[i].delta > 0 ? '+' : rows[i].delta < 0 ? '-' : '0');
    }
  }
}
