#include "promptstrata/recall_table.hpp"

#include <algorithm>
#include <map>

#include "promptstrata/error.hpp"

namespace promptstrata {

namespace {

int value_rank(Axis axis, const std::string& value) {
  switch (axis) {
    case Axis::ImageIncomeClass:
    case Axis::CountryWbClass:
      if (auto c = parse_income_class(value)) return static_cast<int>(*c);
      break;
    case Axis::Continent:
      if (auto c = parse_continent(value)) return static_cast<int>(*c);
      break;
    case Axis::CoarseIncome:
      if (auto c = parse_coarse_income(value)) return static_cast<int>(*c);
      break;
    case Axis::Country:
      break;
  }
  return -1;
}

[[noreturn]] void table_error(const std::string& what) {
  throw Error(ErrorKind::SchemaViolation, "recall table: " + what);
}

}  // namespace

bool group_less(const GroupKey& a, const GroupKey& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].first != b[i].first) return a[i].first < b[i].first;
    const int ra = value_rank(a[i].first, a[i].second);
    const int rb = value_rank(b[i].first, b[i].second);
    if (ra != rb) return ra < rb;
    if (a[i].second != b[i].second) return a[i].second < b[i].second;
  }
  return a.size() < b.size();
}

std::string group_label(const GroupKey& g) {
  if (g.empty()) return "all";
  std::string out;
  for (const auto& [axis, value] : g) {
    if (!out.empty()) out += '/';
    out += value;
  }
  return out;
}

void RecallTable::canonicalize() {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < columns.size(); ++i) position.emplace(columns[i], i);
  auto pos = [&](const std::string& label) {
    auto it = position.find(label);
    return it == position.end() ? columns.size() : it->second;
  };
  std::stable_sort(cells.begin(), cells.end(), [&](const RecallCell& a, const RecallCell& b) {
    if (group_less(a.group, b.group)) return true;
    if (group_less(b.group, a.group)) return false;
    const auto pa = pos(a.prompt), pb = pos(b.prompt);
    if (pa != pb) return pa < pb;
    return a.prompt < b.prompt;
  });
}

std::vector<Axis> RecallTable::axes() const {
  std::vector<Axis> out;
  if (plan.is_object() && plan.contains("axes")) {
    for (const auto& a : plan["axes"]) {
      if (auto axis = parse_axis(a.get<std::string>())) out.push_back(*axis);
    }
  }
  return out;
}

const RecallCell* RecallTable::find(const GroupKey& group, const std::string& prompt) const {
  for (const auto& c : cells)
    if (c.prompt == prompt && c.group == group) return &c;
  return nullptr;
}

RecallTable RecallTable::column(const std::string& prompt) const {
  RecallTable out;
  out.plan = plan;
  out.columns = {prompt};
  for (const auto& c : cells)
    if (c.prompt == prompt) out.cells.push_back(c);
  return out;
}

nlohmann::json RecallTable::to_json() const {
  nlohmann::json j;
  j["plan"] = plan;
  j["columns"] = columns;
  j["groups"] = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json axes = nlohmann::json::object();
    for (const auto& [axis, value] : c.group) axes[std::string(to_string(axis))] = value;
    j["groups"].push_back({{"axes", axes},
                           {"prompt", c.prompt},
                           {"recall", c.recall},
                           {"delta", c.delta},
                           {"topic_count", c.topic_count}});
  }
  return j;
}

RecallTable RecallTable::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("groups") || !j["groups"].is_array()) {
    table_error("expected an object with a `groups` array");
  }
  RecallTable t;
  t.plan = j.value("plan", nlohmann::json::object());
  if (j.contains("columns")) {
    for (const auto& c : j["columns"]) t.columns.push_back(c.get<std::string>());
  }
  const auto axes = t.axes();
  for (const auto& g : j["groups"]) {
    if (!g.is_object() || !g.contains("axes") || !g.contains("recall") || !g["recall"].is_number()) {
      table_error("malformed group entry");
    }
    RecallCell cell;
    const auto& a = g["axes"];
    if (!a.is_object()) table_error("`axes` must be an object");
    std::vector<Axis> order = axes;
    if (order.empty()) {
      for (const auto& [name, v] : a.items()) {
        auto axis = parse_axis(name);
        if (!axis) table_error("unknown axis '" + name + "'");
        order.push_back(*axis);
      }
    }
    for (auto axis : order) {
      const std::string name(to_string(axis));
      if (!a.contains(name)) table_error("group is missing axis '" + name + "'");
      cell.group.emplace_back(axis, a[name].get<std::string>());
    }
    cell.prompt = g.value("prompt", std::string(kBaselineLabel));
    cell.recall = g["recall"].get<double>();
    cell.delta = g.value("delta", 0.0);
    cell.topic_count = g.value("topic_count", std::size_t{0});
    t.cells.push_back(std::move(cell));
  }
  if (t.columns.empty()) {
    for (const auto& c : t.cells)
      if (std::find(t.columns.begin(), t.columns.end(), c.prompt) == t.columns.end())
        t.columns.push_back(c.prompt);
  }
  return t;
}

std::string RecallTable::serialize() const { return to_json().dump(2) + "\n"; }

}  // namespace promptstrata
