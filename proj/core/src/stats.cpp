#include "promptstrata/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>

#include "promptstrata/error.hpp"

namespace promptstrata {

std::string_view to_string(WilcoxonMethod m) {
  switch (m) {
    case WilcoxonMethod::Auto: return "auto";
    case WilcoxonMethod::ExactEnumeration: return "exact";
    case WilcoxonMethod::NormalApproximation: return "normal";
  }
  return "?";
}

nlohmann::json WilcoxonResult::to_json() const {
  return {{"n", n_effective},
          {"w", w_statistic},
          {"p", p_value},
          {"significant", significant},
          {"method", to_string(method)},
          {"zero_handling", "drop"}};
}

namespace {

// Ranks of |d| doubled so that average ranks of ties stay integral.
std::vector<std::int64_t> doubled_ranks(const std::vector<double>& magnitudes, double& tie_term) {
  const std::size_t n = magnitudes.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return magnitudes[x] < magnitudes[y]; });
  std::vector<std::int64_t> ranks(n);
  tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && magnitudes[order[j + 1]] == magnitudes[order[i]]) ++j;
    // positions i..j (0-based) share rank ((i+1)+(j+1))/2, doubled: i+j+2
    const auto r2 = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

// P(T+ <= w2 / 2) under the null, by counting sign assignments whose doubled
// positive-rank sum is at most w2.
double exact_lower_tail(const std::vector<std::int64_t>& ranks2, std::int64_t w2) {
  const auto total = std::accumulate(ranks2.begin(), ranks2.end(), std::int64_t{0});
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  std::int64_t reach = 0;
  for (auto r : ranks2) {
    for (std::int64_t s = reach; s >= 0; --s) {
      if (count[static_cast<std::size_t>(s)] != 0.0) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
    }
    reach += r;
  }
  double favourable = 0.0;
  for (std::int64_t s = 0; s <= std::min(w2, total); ++s) favourable += count[static_cast<std::size_t>(s)];
  return favourable / std::ldexp(1.0, static_cast<int>(ranks2.size()));
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::LengthMismatch, "samples differ in length: " + std::to_string(a.size()) +
                                               " vs " + std::to_string(b.size()));
  }
  if (a.size() < 2) throw Error(ErrorKind::TooFewValues, "the signed-rank test needs at least two pairs");

  std::vector<double> magnitudes;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw Error(ErrorKind::NonFiniteValue, "non-finite sample value");
    if (d == 0.0) continue;
    magnitudes.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }
  if (magnitudes.empty()) throw Error(ErrorKind::AllZeroDifferences, "every paired difference is zero");

  double tie_term = 0.0;
  const auto ranks2 = doubled_ranks(magnitudes, tie_term);
  std::int64_t plus2 = 0, minus2 = 0;
  for (std::size_t i = 0; i < ranks2.size(); ++i) (positive[i] ? plus2 : minus2) += ranks2[i];

  WilcoxonResult r;
  r.n_effective = magnitudes.size();
  r.t_plus = static_cast<double>(plus2) / 2.0;
  r.t_minus = static_cast<double>(minus2) / 2.0;
  r.w_statistic = std::min(r.t_plus, r.t_minus);
  if (method == WilcoxonMethod::Auto) {
    method = r.n_effective <= kExactLimit ? WilcoxonMethod::ExactEnumeration
                                          : WilcoxonMethod::NormalApproximation;
  }
  r.method = method;

  if (method == WilcoxonMethod::ExactEnumeration) {
    r.p_value = std::min(1.0, 2.0 * exact_lower_tail(ranks2, std::min(plus2, minus2)));
  } else {
    const double n = static_cast<double>(r.n_effective);
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) {
      r.p_value = 1.0;
    } else {
      // W <= mean, so the continuity correction moves it up by one half.
      const double z = std::min(0.0, (r.w_statistic - mean + 0.5) / std::sqrt(var));
      r.p_value = std::min(1.0, std::erfc(-z / std::sqrt(2.0)));
    }
  }
  r.significant = r.p_value <= kAlpha;
  return r;
}

namespace {

std::map<GroupKey, double, bool (*)(const GroupKey&, const GroupKey&)> single_column(
    const RecallTable& t, const char* which) {
  std::map<GroupKey, double, bool (*)(const GroupKey&, const GroupKey&)> out(&group_less);
  for (const auto& c : t.cells) {
    if (!out.emplace(c.group, c.recall).second) {
      throw Error(ErrorKind::GroupMismatch,
                  std::string(which) + " table has several cells for group " + group_label(c.group),
                  group_label(c.group));
    }
  }
  return out;
}

}  // namespace

std::vector<DeltaRow> delta_summary(const RecallTable& baseline, const RecallTable& intervention) {
  if (baseline.axes() != intervention.axes()) {
    throw Error(ErrorKind::GroupMismatch, "tables are grouped by different axes");
  }
  const auto base = single_column(baseline, "baseline");
  const auto other = single_column(intervention, "intervention");
  if (base.size() != other.size()) {
    throw Error(ErrorKind::GroupMismatch, "tables cover different groups");
  }
  std::vector<DeltaRow> rows;
  auto it = other.begin();
  for (const auto& [group, b] : base) {
    if (it->first != group) {
      throw Error(ErrorKind::GroupMismatch, "group " + group_label(group) + " is missing from one table",
                  group_label(group));
    }
    DeltaRow row{group, b, it->second, it->second - b, '0'};
    row.sign = row.delta > 0.0 ? '+' : (row.delta < 0.0 ? '-' : '0');
    rows.push_back(std::move(row));
    ++it;
  }
  return rows;
}

RecallPairs paired_recalls(const RecallTable& table, const std::string& intervention_label,
                           const std::string& baseline_label) {
  const auto base = single_column(table.column(baseline_label), "baseline");
  const auto other = single_column(table.column(intervention_label), "intervention");
  RecallPairs out;
  for (const auto& [group, b] : base) {
    auto it = other.find(group);
    if (it == other.end()) continue;
    out.groups.push_back(group);
    out.baseline.push_back(b);
    out.intervention.push_back(it->second);
  }
  return out;
}

}  // namespace promptstrata
