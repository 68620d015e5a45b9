#include "promptstrata/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "promptstrata/error.hpp"

namespace promptstrata {

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

std::vector<double> alignment_scores(const EmbeddingStore& images, std::span<const float> prompt) {
  if (prompt.size() != images.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "prompt has dim " + std::to_string(prompt.size()) +
                                                  ", images have dim " + std::to_string(images.dim()));
  }
  if (std::abs(l2_norm(prompt) - 1.0) > 1e-5) {
    throw Error(ErrorKind::NotNormalized, "prompt vector is not unit length");
  }
  std::vector<double> scores(images.rows());
  for (std::size_t r = 0; r < images.rows(); ++r) scores[r] = dot(images.row(r), prompt);
  return scores;
}

RetrievalRun topn_retrieve(std::span<const double> scores, const std::vector<std::string>& ids,
                           std::size_t n) {
  if (scores.size() != ids.size()) {
    throw Error(ErrorKind::LengthMismatch, "scores and ids differ in length");
  }
  if (ids.empty()) throw Error(ErrorKind::EmptyPool, "retrieval pool is empty");
  if (n == 0) throw Error(ErrorKind::BadArgument, "n must be at least 1");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(n, ids.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return ids[a] < ids[b];
                    });
  RetrievalRun run;
  run.n = n;
  for (std::size_t k = 0; k < take; ++k) {
    run.retrieved.push_back(ids[order[k]]);
    run.scores.push_back(scores[order[k]]);
  }
  return run;
}

std::optional<double> group_recall(const RetrievalRun& run, const std::set<std::string>& ground_truth,
                                   const std::set<std::string>& group) {
  std::size_t den = 0;
  for (const auto& id : ground_truth) den += group.count(id);
  if (den == 0) return std::nullopt;
  std::size_t hits = 0;
  for (const auto& id : run.retrieved) hits += (ground_truth.count(id) && group.count(id)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(den);
}

std::vector<std::string> retrieval_pool(const Metadata& meta) {
  std::vector<std::string> ids;
  for (const auto& img : meta.images)
    if (!meta.topics.at(img.topic_id).subjective) ids.push_back(img.image_id);
  return ids;
}

namespace {

constexpr std::size_t kNoGroup = static_cast<std::size_t>(-1);

struct OutColumn {
  std::string label;
  const ColumnSpec* spec = nullptr;
  std::vector<PromptFamily> fixed;  // used unless spec->matched()
};

struct GroupLess {
  bool operator()(const GroupKey& a, const GroupKey& b) const { return group_less(a, b); }
};

std::string axis_value(Axis axis, const ImageRecord& img, IncomeClass image_class,
                       const CountryProfile& country) {
  switch (axis) {
    case Axis::ImageIncomeClass: return std::string(to_string(image_class));
    case Axis::CountryWbClass: return std::string(to_string(country.wb_class));
    case Axis::Continent: return std::string(to_string(country.continent));
    case Axis::Country: return img.country_code;
    case Axis::CoarseIncome: return std::string(to_string(coarse_of(image_class)));
  }
  return {};
}

bool passes(const ImageFilter& f, IncomeClass c, const CountryProfile& country) {
  if (!f.income_classes.empty() &&
      std::find(f.income_classes.begin(), f.income_classes.end(), c) == f.income_classes.end())
    return false;
  if (!f.countries.empty() &&
      std::find(f.countries.begin(), f.countries.end(), country.country_code) == f.countries.end())
    return false;
  if (f.require_major_language && !country.major_language) return false;
  return true;
}

const std::string* group_country(const GroupKey& g) {
  for (const auto& [axis, value] : g)
    if (axis == Axis::Country) return &value;
  return nullptr;
}

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

RecallTable run_experiment(const ExperimentPlan& plan, const Dataset& data, const EngineOptions& options) {
  plan.validate();
  if (options.workers == 0) throw Error(ErrorKind::BadArgument, "workers must be at least 1");
  const auto& meta = data.meta;

  // Retrieval pool, in image-id order so that index order is id order.
  std::vector<const ImageRecord*> pool;
  for (const auto& img : meta.images)
    if (!meta.topics.at(img.topic_id).subjective) pool.push_back(&img);
  if (pool.empty()) throw Error(ErrorKind::EmptyPool, "no images with a non-subjective topic");

  std::set<std::string> topic_set;
  if (plan.topics.empty()) {
    for (const auto* img : pool) topic_set.insert(img->topic_id);
  } else {
    for (const auto& t : plan.topics) {
      if (meta.topics.at(t).subjective) {
        throw Error(ErrorKind::InvalidPlan, "topic '" + t + "' is subjective and outside the pool", t);
      }
      topic_set.insert(t);
    }
  }
  const std::vector<std::string> topics(topic_set.begin(), topic_set.end());
  std::map<std::string, std::size_t> topic_index;
  for (std::size_t t = 0; t < topics.size(); ++t) topic_index.emplace(topics[t], t);

  for (const auto& code : plan.filter.countries) meta.countries.at(code);

  // Filter and group assignment.
  std::map<GroupKey, std::size_t, GroupLess> group_ids;
  std::vector<GroupKey> image_keys(pool.size());
  std::vector<bool> in_filter(pool.size(), false);
  std::set<std::string> pool_countries, filtered_countries;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& img = *pool[i];
    const auto& country = meta.countries.at(img.country_code);
    pool_countries.insert(img.country_code);
    const IncomeClass cls = assign_income_class(img.monthly_income_usd, data.edges);
    if (!passes(plan.filter, cls, country)) continue;
    in_filter[i] = true;
    filtered_countries.insert(img.country_code);
    GroupKey key;
    for (auto axis : plan.axes) key.emplace_back(axis, axis_value(axis, img, cls, country));
    image_keys[i] = key;
    group_ids.emplace(std::move(key), 0);
  }
  if (group_ids.empty()) {
    throw Error(ErrorKind::EmptyGroup, "plan '" + plan.name + "': filter leaves no images", plan.name);
  }
  std::vector<GroupKey> groups;
  for (auto& [key, idx] : group_ids) {
    idx = groups.size();
    groups.push_back(key);
  }
  std::vector<std::size_t> image_group(pool.size(), kNoGroup);
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (in_filter[i]) image_group[i] = group_ids.at(image_keys[i]);

  // Ground truth sizes and per-group denominators.
  const std::size_t G = groups.size();
  std::vector<std::size_t> gt_size(topics.size(), 0);
  std::vector<std::vector<std::size_t>> den(topics.size(), std::vector<std::size_t>(G, 0));
  std::vector<std::size_t> image_topic(pool.size(), kNoGroup);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto it = topic_index.find(pool[i]->topic_id);
    if (it == topic_index.end()) continue;
    image_topic[i] = it->second;
    ++gt_size[it->second];
    if (image_group[i] != kNoGroup) ++den[it->second][image_group[i]];
  }

  // Columns.
  auto scope_countries = [&](CountryScope s) -> const std::set<std::string>& {
    return s == CountryScope::Pool ? pool_countries : filtered_countries;
  };
  auto scope_languages = [&](CountryScope s) {
    std::set<std::string> langs;
    for (const auto& code : scope_countries(s))
      if (const auto& l = meta.countries.at(code).major_language) langs.insert(*l);
    return langs;
  };
  std::vector<OutColumn> columns;
  for (const auto& spec : plan.columns) {
    switch (spec.kind) {
      case ColumnSpec::Kind::Translated: {
        std::set<std::string> langs(spec.languages.begin(), spec.languages.end());
        if (spec.languages.empty()) langs = scope_languages(spec.scope);
        if (spec.each) {
          for (const auto& l : langs) columns.push_back({expanded_label(spec, l), &spec, {Translated{l}}});
        } else {
          OutColumn c{column_label(spec), &spec, {}};
          for (const auto& l : langs) c.fixed.emplace_back(Translated{l});
          columns.push_back(std::move(c));
        }
        break;
      }
      case ColumnSpec::Kind::CountrySuffix: {
        std::set<std::string> codes;
        if (!spec.countries.empty()) {
          for (const auto& code : spec.countries) {
            meta.countries.at(code);
            codes.insert(code);
          }
        } else {
          for (const auto& code : scope_countries(spec.scope)) {
            const auto& p = meta.countries.at(code);
            if (spec.wb_class && p.wb_class != *spec.wb_class) continue;
            if (spec.continent && p.continent != *spec.continent) continue;
            codes.insert(code);
          }
        }
        if (spec.each) {
          for (const auto& c : codes) columns.push_back({expanded_label(spec, c), &spec, {CountrySuffix{c}}});
        } else {
          OutColumn c{column_label(spec), &spec, {}};
          for (const auto& code : codes) c.fixed.emplace_back(CountrySuffix{code});
          columns.push_back(std::move(c));
        }
        break;
      }
      case ColumnSpec::Kind::IncomeSuffix: {
        OutColumn c{column_label(spec), &spec, {}};
        const auto n = data.synonyms.phrases(spec.category).size();
        for (std::size_t i = 0; i < n; ++i) c.fixed.emplace_back(IncomeSuffix{spec.category, i});
        columns.push_back(std::move(c));
        break;
      }
      case ColumnSpec::Kind::NativeTranslated:
      case ColumnSpec::Kind::OwnCountrySuffix:
        columns.push_back({column_label(spec), &spec, {}});
        break;
    }
  }
  {
    std::set<std::string> seen{std::string(kBaselineLabel)};
    for (const auto& c : columns)
      if (!seen.insert(c.label).second) {
        throw Error(ErrorKind::InvalidPlan, "plan '" + plan.name + "' produces column '" + c.label + "' twice",
                    c.label);
      }
  }

  // Variants per (group, column); empty means no cell.
  auto variants_for = [&](const OutColumn& col, const GroupKey& g) -> std::vector<PromptFamily> {
    if (!col.spec->matched()) return col.fixed;
    const std::string* code = group_country(g);
    if (code == nullptr) return {};
    if (col.spec->kind == ColumnSpec::Kind::OwnCountrySuffix) return {CountrySuffix{*code}};
    const auto& lang = meta.countries.at(*code).major_language;
    if (!lang) return {};
    return {Translated{*lang}};
  };

  // Distinct families to run on every topic.
  std::map<std::string, PromptFamily> families;
  families.emplace(family_tag(DefaultEnglish{}), DefaultEnglish{});
  for (const auto& col : columns)
    for (const auto& g : groups)
      for (const auto& f : variants_for(col, g)) families.emplace(family_tag(f), f);

  struct Job {
    std::size_t topic;
    std::size_t prompt_row;
  };
  std::vector<Job> jobs;
  std::map<std::string, std::size_t> job_index;  // prompt key -> job
  for (std::size_t t = 0; t < topics.size(); ++t) {
    if (gt_size[t] == 0) continue;
    for (const auto& [tag, family] : families) {
      const auto key = prompt_key(family, topics[t]);
      auto row = data.prompt_embeddings.find(key);
      if (!row) {
        if (std::holds_alternative<DefaultEnglish>(family)) {
          throw Error(ErrorKind::MissingBaseline, "no default-English prompt for topic '" + topics[t] + "'",
                      key);
        }
        throw Error(ErrorKind::UnresolvedPrompt, "prompt '" + key + "' has no embedding row", key);
      }
      job_index.emplace(key, jobs.size());
      jobs.push_back({t, *row});
    }
  }

  // hits[job][group]
  std::vector<std::vector<std::size_t>> hits(jobs.size());
  const bool group_scope = plan.gt_scope == GtScope::Group;
  parallel_for(jobs.size(), options.workers, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto prompt = data.prompt_embeddings.row(job.prompt_row);
    std::vector<double> scores(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
      scores[i] = dot(data.image_embeddings.row(pool[i]->embedding_row), prompt);
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t take = std::min(gt_size[job.topic], pool.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (scores[a] != scores[b]) return scores[a] > scores[b];
                        return a < b;
                      });
    std::vector<std::size_t> h(G, 0);
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t i = order[k];
      if (image_topic[i] != job.topic || image_group[i] == kNoGroup) continue;
      const std::size_t g = image_group[i];
      if (group_scope && k >= den[job.topic][g]) continue;
      ++h[g];
    }
    hits[j] = std::move(h);
  });

  auto aggregate = [&](const std::vector<PromptFamily>& variants, std::size_t g, std::size_t& topic_count) {
    std::vector<std::string> tags;
    for (const auto& f : variants) tags.push_back(family_tag(f));
    const double nv = static_cast<double>(variants.size());
    topic_count = 0;
    if (plan.aggregation == Aggregation::Macro) {
      double total = 0.0;
      for (std::size_t t = 0; t < topics.size(); ++t) {
        const std::size_t d = den[t][g];
        if (d == 0) continue;
        double s = 0.0;
        for (const auto& tag : tags) {
          const auto h = hits[job_index.at(tag + "|" + topics[t])][g];
          s += static_cast<double>(h) / static_cast<double>(d);
        }
        total += s / nv;
        ++topic_count;
      }
      return total / static_cast<double>(topic_count);
    }
    double num = 0.0;
    std::size_t den_sum = 0;
    for (std::size_t t = 0; t < topics.size(); ++t) {
      const std::size_t d = den[t][g];
      if (d == 0) continue;
      std::size_t h = 0;
      for (const auto& tag : tags) h += hits[job_index.at(tag + "|" + topics[t])][g];
      num += static_cast<double>(h) / nv;
      den_sum += d;
      ++topic_count;
    }
    return num / static_cast<double>(den_sum);
  };

  RecallTable table;
  table.plan = plan.to_json();
  table.columns.emplace_back(kBaselineLabel);
  for (const auto& c : columns) table.columns.push_back(c.label);

  const std::vector<PromptFamily> baseline{DefaultEnglish{}};
  for (std::size_t g = 0; g < G; ++g) {
    bool defined = false;
    for (std::size_t t = 0; t < topics.size(); ++t) defined = defined || den[t][g] > 0;
    if (!defined) continue;
    std::size_t base_topics = 0;
    const double base = aggregate(baseline, g, base_topics);
    table.cells.push_back({groups[g], std::string(kBaselineLabel), base, 0.0, base_topics});
    for (const auto& col : columns) {
      const auto variants = variants_for(col, groups[g]);
      if (variants.empty()) continue;
      std::size_t count = 0;
      const double r = aggregate(variants, g, count);
      table.cells.push_back({groups[g], col.label, r, r - base, count});
    }
  }
  table.canonicalize();
  return table;
}

}  // namespace promptstrata
