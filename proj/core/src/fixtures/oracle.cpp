// Brute-force reference evaluator. Written against the plan semantics only:
// it shares no scoring, ranking or aggregation code with the engine.

#include <algorithm>
#include <map>
#include <set>

#include "promptstrata/error.hpp"
#include "promptstrata/fixtures.hpp"

namespace promptstrata::fixtures {

namespace {

struct Item {
  std::string id;
  std::string topic;
  std::string country;
  IncomeClass income_class;
  std::size_t row;
};

IncomeClass class_for(double income, const QuartileEdges& e) {
  if (income <= e.e1) return IncomeClass::Poor;
  if (income <= e.e2) return IncomeClass::LowMid;
  if (income <= e.e3) return IncomeClass::UpMid;
  return IncomeClass::Rich;
}

std::string value_on(Axis axis, const Item& item, const CountryTable& countries) {
  const auto& p = countries.at(item.country);
  switch (axis) {
    case Axis::ImageIncomeClass: return std::string(to_string(item.income_class));
    case Axis::CountryWbClass: return std::string(to_string(p.wb_class));
    case Axis::Continent: return std::string(to_string(p.continent));
    case Axis::Country: return item.country;
    case Axis::CoarseIncome:
      return item.income_class <= IncomeClass::LowMid ? "Lower" : "Higher";
  }
  return {};
}

struct Column {
  std::string label;
  const ColumnSpec* spec;
  std::vector<std::string> tags;  // family tags, in averaging order
};

}  // namespace

RecallTable oracle_evaluate(const Dataset& data, const ExperimentPlan& plan) {
  const auto& meta = data.meta;
  if (meta.images.size() > kOracleMaxImages) {
    throw Error(ErrorKind::TooLarge, "oracle handles at most 500 images, got " + std::to_string(meta.images.size()));
  }
  plan.validate();

  std::vector<Item> pool;
  for (const auto& img : meta.images) {
    if (meta.topics.at(img.topic_id).subjective) continue;
    auto row = data.image_embeddings.find(img.image_id);
    if (!row) throw Error(ErrorKind::MissingEmbedding, "no embedding for " + img.image_id, img.image_id);
    pool.push_back({img.image_id, img.topic_id, img.country_code,
                    class_for(img.monthly_income_usd, data.edges), *row});
  }
  std::sort(pool.begin(), pool.end(), [](const Item& a, const Item& b) { return a.id < b.id; });

  std::set<std::string> topics(plan.topics.begin(), plan.topics.end());
  if (plan.topics.empty())
    for (const auto& it : pool) topics.insert(it.topic);
  for (const auto& t : topics)
    if (meta.topics.at(t).subjective) throw Error(ErrorKind::InvalidPlan, "subjective topic " + t, t);

  auto keep = [&](const Item& it) {
    const auto& p = meta.countries.at(it.country);
    const auto& ic = plan.filter.income_classes;
    const auto& cc = plan.filter.countries;
    if (!ic.empty() && std::find(ic.begin(), ic.end(), it.income_class) == ic.end()) return false;
    if (!cc.empty() && std::find(cc.begin(), cc.end(), it.country) == cc.end()) return false;
    return !(plan.filter.require_major_language && !p.major_language);
  };

  // Group -> member ids.
  std::map<GroupKey, std::set<std::string>, bool (*)(const GroupKey&, const GroupKey&)> groups(&group_less);
  std::set<std::string> all_countries, kept_countries;
  for (const auto& it : pool) {
    all_countries.insert(it.country);
    if (!keep(it)) continue;
    kept_countries.insert(it.country);
    GroupKey key;
    for (auto a : plan.axes) key.emplace_back(a, value_on(a, it, meta.countries));
    groups[key].insert(it.id);
  }
  if (groups.empty()) throw Error(ErrorKind::EmptyGroup, "no images pass the filter", plan.name);

  // Columns.
  std::vector<Column> columns;
  for (const auto& spec : plan.columns) {
    const auto& scope = spec.scope == CountryScope::Pool ? all_countries : kept_countries;
    if (spec.kind == ColumnSpec::Kind::Translated) {
      std::set<std::string> langs(spec.languages.begin(), spec.languages.end());
      if (langs.empty())
        for (const auto& c : scope)
          if (meta.countries.at(c).major_language) langs.insert(*meta.countries.at(c).major_language);
      if (spec.each) {
        for (const auto& l : langs) columns.push_back({"translated:" + l, &spec, {"translated:" + l}});
      } else {
        Column col{column_label(spec), &spec, {}};
        for (const auto& l : langs) col.tags.push_back("translated:" + l);
        columns.push_back(col);
      }
    } else if (spec.kind == ColumnSpec::Kind::CountrySuffix) {
      std::set<std::string> codes;
      if (!spec.countries.empty()) {
        for (const auto& c : spec.countries) {
          meta.countries.at(c);
          codes.insert(c);
        }
      } else {
        for (const auto& c : scope) {
          const auto& p = meta.countries.at(c);
          if ((!spec.wb_class || p.wb_class == *spec.wb_class) &&
              (!spec.continent || p.continent == *spec.continent))
            codes.insert(c);
        }
      }
      if (spec.each) {
        for (const auto& c : codes) columns.push_back({"country:" + c, &spec, {"country:" + c}});
      } else {
        Column col{column_label(spec), &spec, {}};
        for (const auto& c : codes) col.tags.push_back("country:" + c);
        columns.push_back(col);
      }
    } else if (spec.kind == ColumnSpec::Kind::IncomeSuffix) {
      Column col{column_label(spec), &spec, {}};
      const std::string cat(to_string(spec.category));
      for (std::size_t i = 0; i < data.synonyms.phrases(spec.category).size(); ++i)
        col.tags.push_back("income:" + cat + ":" + std::to_string(i));
      columns.push_back(col);
    } else {
      columns.push_back({column_label(spec), &spec, {}});
    }
  }
  std::set<std::string> labels{"default"};
  for (const auto& c : columns)
    if (!labels.insert(c.label).second) throw Error(ErrorKind::InvalidPlan, "duplicate column " + c.label, c.label);

  // Full ranking of the pool for one prompt key, memoized.
  std::map<std::string, std::vector<std::string>> rankings;
  auto ranking = [&](const std::string& key) -> const std::vector<std::string>& {
    auto found = rankings.find(key);
    if (found != rankings.end()) return found->second;
    auto row = data.prompt_embeddings.find(key);
    if (!row) {
      if (key.rfind("default|", 0) == 0) throw Error(ErrorKind::MissingBaseline, "missing " + key, key);
      throw Error(ErrorKind::UnresolvedPrompt, "missing " + key, key);
    }
    const auto prompt = data.prompt_embeddings.row(*row);
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& it : pool) {
      const auto image = data.image_embeddings.row(it.row);
      double s = 0.0;
      for (std::size_t d = 0; d < image.size(); ++d) s += static_cast<double>(image[d]) * static_cast<double>(prompt[d]);
      scored.emplace_back(s, it.id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<std::string> ids;
    for (auto& [s, id] : scored) ids.push_back(id);
    return rankings.emplace(key, std::move(ids)).first->second;
  };

  std::map<std::string, std::set<std::string>> truth;
  for (const auto& it : pool)
    if (topics.count(it.topic)) truth[it.topic].insert(it.id);

  // Returns (recall, topics used); topics used == 0 means undefined.
  auto evaluate = [&](const std::vector<std::string>& tags, const std::set<std::string>& members) {
    double macro_total = 0.0, micro_num = 0.0;
    std::size_t used = 0, micro_den = 0;
    for (const auto& topic : topics) {
      const auto gt_it = truth.find(topic);
      if (gt_it == truth.end()) continue;
      const auto& gt = gt_it->second;
      std::set<std::string> relevant;
      for (const auto& id : gt)
        if (members.count(id)) relevant.insert(id);
      if (relevant.empty()) continue;
      const std::size_t cutoff = plan.gt_scope == GtScope::Pool ? gt.size() : relevant.size();
      double per_topic = 0.0;
      std::size_t hit_sum = 0;
      for (const auto& tag : tags) {
        const auto& ranked = ranking(tag + "|" + topic);
        std::size_t hits = 0;
        for (std::size_t k = 0; k < cutoff && k < ranked.size(); ++k) hits += relevant.count(ranked[k]);
        per_topic += static_cast<double>(hits) / static_cast<double>(relevant.size());
        hit_sum += hits;
      }
      const double n_tags = static_cast<double>(tags.size());
      macro_total += per_topic / n_tags;
      micro_num += static_cast<double>(hit_sum) / n_tags;
      micro_den += relevant.size();
      ++used;
    }
    if (used == 0) return std::pair<double, std::size_t>{0.0, 0};
    const double r = plan.aggregation == Aggregation::Macro ? macro_total / static_cast<double>(used)
                                                            : micro_num / static_cast<double>(micro_den);
    return std::pair<double, std::size_t>{r, used};
  };

  RecallTable table;
  table.plan = plan.to_json();
  table.columns.push_back("default");
  for (const auto& c : columns) table.columns.push_back(c.label);
  for (const auto& [key, members] : groups) {
    const auto [base, base_used] = evaluate({"default"}, members);
    if (base_used == 0) continue;
    table.cells.push_back({key, "default", base, 0.0, base_used});
    std::string country;
    for (const auto& [axis, v] : key)
      if (axis == Axis::Country) country = v;
    for (const auto& col : columns) {
      std::vector<std::string> tags = col.tags;
      if (col.spec->kind == ColumnSpec::Kind::NativeTranslated) {
        const auto& lang = meta.countries.at(country).major_language;
        if (!lang) continue;
        tags = {"translated:" + *lang};
      } else if (col.spec->kind == ColumnSpec::Kind::OwnCountrySuffix) {
        tags = {"country:" + country};
      }
      if (tags.empty()) continue;
      const auto [r, used] = evaluate(tags, members);
      table.cells.push_back({key, col.label, r, r - base, used});
    }
  }
  table.canonicalize();
  return table;
}

}  // namespace promptstrata::fixtures
