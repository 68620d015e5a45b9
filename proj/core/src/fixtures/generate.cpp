#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "io.hpp"
#include "promptstrata/embedding_store.hpp"
#include "promptstrata/error.hpp"
#include "promptstrata/fixtures.hpp"
#include "random.hpp"

namespace promptstrata::fixtures {

namespace {

[[noreturn]] void spec_error(const std::string& what) {
  throw Error(ErrorKind::InvalidSpec, "invalid fixture spec: " + what);
}

struct IncomeRange {
  double lo;  // exclusive
  double hi;  // inclusive
};

// Class ranges under the bundled Dollar Street edges.
IncomeRange income_range(IncomeClass c) {
  const auto& e = dollar_street_edges();
  switch (c) {
    case IncomeClass::Poor: return {10.0, e.e1};
    case IncomeClass::LowMid: return {e.e1, e.e2};
    case IncomeClass::UpMid: return {e.e2, e.e3};
    case IncomeClass::Rich: return {e.e3, 10000.0};
  }
  return {0.0, 1.0};
}

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
  return buf;
}

template <class T>
T field(const nlohmann::json& j, const char* name, T fallback) {
  if (!j.contains(name)) return fallback;
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    spec_error(std::string("field `") + name + "` has the wrong type");
  }
}

void append_scaled(std::vector<float>& out, const std::vector<double>& v, double scale) {
  for (double x : v) out.push_back(static_cast<float>(x * scale));
}

}  // namespace

void PlantedSpec::validate() const {
  if (n_topics == 0) spec_error("n_topics must be positive");
  if (images_per_stratum == 0) spec_error("images_per_stratum must be positive");
  if (dim < 4) spec_error("dim must be at least 4");
  if (dim < n_topics + 2) spec_error("dim must be at least n_topics + 2");
  if (!(margin > 0.0 && margin < 1.0)) spec_error("margin must lie in (0, 1)");
  if (!(noise_scale >= 0.0)) spec_error("noise_scale must be non-negative");
  if (!(margin + noise_scale < 1.0)) spec_error("margin + noise_scale must be below 1");
  if (!(alignment_min >= 0.0 && alignment_min <= alignment_max && alignment_max <= 1.0)) {
    spec_error("variant alignment must satisfy 0 <= min <= max <= 1");
  }
  if (!(stratum_dropout >= 0.0 && stratum_dropout < 1.0)) spec_error("stratum_dropout must lie in [0, 1)");
  if (countries.empty()) spec_error("at least one country is required");
  std::set<std::string> seen;
  for (const auto& c : countries) {
    if (!CountryTable::bundled().find(c)) spec_error("unknown country '" + c + "'");
    if (!seen.insert(c).second) spec_error("country '" + c + "' listed twice");
  }
  if (synonyms_per_category == 0) spec_error("synonyms_per_category must be positive");
  for (const auto& [cat, list] : SynonymSet::defaults().all()) {
    if (synonyms_per_category > list.size()) spec_error("synonyms_per_category exceeds the bundled list");
  }
  for (const auto& f : prompt_families) {
    if (f != "translated" && f != "country" && f != "income") spec_error("unknown prompt family '" + f + "'");
  }
}

nlohmann::json PlantedSpec::to_json() const {
  return {{"seed", seed},
          {"n_topics", n_topics},
          {"images_per_stratum", images_per_stratum},
          {"dim", dim},
          {"margin", margin},
          {"noise_scale", noise_scale},
          {"countries", countries},
          {"variant_alignment", {alignment_min, alignment_max}},
          {"stratum_dropout", stratum_dropout},
          {"subjective_topics", subjective_topics},
          {"synonyms_per_category", synonyms_per_category},
          {"prompt_families", prompt_families}};
}

PlantedSpec PlantedSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) spec_error("expected a JSON object");
  PlantedSpec s;
  s.seed = field(j, "seed", s.seed);
  s.n_topics = field(j, "n_topics", s.n_topics);
  s.images_per_stratum = field(j, "images_per_stratum", s.images_per_stratum);
  s.dim = field(j, "dim", s.dim);
  s.margin = field(j, "margin", s.margin);
  s.noise_scale = field(j, "noise_scale", s.noise_scale);
  s.countries = field(j, "countries", s.countries);
  if (j.contains("variant_alignment")) {
    auto range = field(j, "variant_alignment", std::vector<double>{});
    if (range.size() != 2) spec_error("`variant_alignment` must be [min, max]");
    s.alignment_min = range[0];
    s.alignment_max = range[1];
  }
  s.stratum_dropout = field(j, "stratum_dropout", s.stratum_dropout);
  s.subjective_topics = field(j, "subjective_topics", s.subjective_topics);
  s.synonyms_per_category = field(j, "synonyms_per_category", s.synonyms_per_category);
  s.prompt_families = field(j, "prompt_families", s.prompt_families);
  s.validate();
  return s;
}

// Draw order: stratum dropout mask, then images (topic, country, class,
// index), then prompts in prompt-plan order.
Fixture generate(const PlantedSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Fixture f;
  f.spec = spec;
  f.dim = spec.dim;
  f.space_tag = "fixture:planted";
  f.edges = dollar_street_edges();

  std::vector<std::vector<bool>> dropped(spec.countries.size(), std::vector<bool>(4, false));
  bool any_kept = false;
  for (auto& row : dropped) {
    for (std::size_t k = 0; k < 4; ++k) {
      row[k] = rng.bernoulli(spec.stratum_dropout);
      any_kept = any_kept || !row[k];
    }
  }
  if (!any_kept) dropped[0][0] = false;

  std::map<std::string, TopicEntry> topics;
  std::vector<std::string> topic_ids;
  for (std::size_t t = 0; t < spec.n_topics; ++t) {
    topic_ids.push_back(numbered("t", t, 2));
    topics.emplace(topic_ids.back(), TopicEntry{numbered("object ", t, 2), false});
  }
  for (std::size_t t = 0; t < spec.subjective_topics; ++t) {
    topic_ids.push_back(numbered("s", t, 2));
    topics.emplace(topic_ids.back(), TopicEntry{numbered("feeling ", t, 2), true});
  }
  f.meta.topics = TopicCatalog(topics);
  f.meta.countries = CountryTable::bundled();

  const std::size_t free_dims = spec.dim - spec.n_topics;
  const double alpha_min = spec.margin + spec.noise_scale;
  std::size_t counter = 0;
  for (std::size_t t = 0; t < topic_ids.size(); ++t) {
    const bool subjective = t >= spec.n_topics;
    for (std::size_t c = 0; c < spec.countries.size(); ++c) {
      for (std::size_t k = 0; k < 4; ++k) {
        if (dropped[c][k]) continue;
        const auto range = income_range(kIncomeClasses[k]);
        for (std::size_t i = 0; i < spec.images_per_stratum; ++i) {
          ImageRecord rec;
          rec.image_id = numbered("img", counter++, 6);
          rec.country_code = spec.countries[c];
          rec.monthly_income_usd = range.hi - (range.hi - range.lo) * rng.uniform();
          rec.topic_id = topic_ids[t];

          std::vector<double> v(spec.dim, 0.0);
          if (subjective) {
            v = rng.unit_vector(spec.dim);
          } else {
            const double alpha = alpha_min + (1.0 - alpha_min) * 0.5 * rng.uniform();
            v[t] = alpha;
            double eta2 = 0.0;
            for (std::size_t s = 0; s < spec.n_topics; ++s) {
              if (s == t) continue;
              v[s] = rng.uniform(-spec.noise_scale, spec.noise_scale);
              eta2 += v[s] * v[s];
            }
            double rest = 1.0 - alpha * alpha - eta2;
            if (rest < 0.0) {
              const double shrink = std::sqrt((1.0 - alpha * alpha) / eta2);
              for (std::size_t s = 0; s < spec.n_topics; ++s)
                if (s != t) v[s] *= shrink;
              rest = 0.0;
            }
            const double gamma = std::sqrt(rest);
            const auto w = rng.unit_vector(free_dims);
            for (std::size_t d = 0; d < free_dims; ++d) v[spec.n_topics + d] = gamma * w[d];
          }
          const double scale = rng.uniform(0.5, 4.0);
          f.image_ids.push_back(rec.image_id);
          append_scaled(f.image_values, v, scale);
          f.meta.images.push_back(std::move(rec));
        }
      }
    }
  }
  // Ids are zero-padded counters, so generation order is already id order.
  for (std::size_t r = 0; r < f.meta.images.size(); ++r) f.meta.images[r].embedding_row = r;

  std::map<IncomeCategory, std::vector<std::string>> phrases;
  for (const auto& [cat, list] : SynonymSet::defaults().all()) {
    phrases[cat].assign(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(spec.synonyms_per_category));
  }
  f.synonyms = SynonymSet(phrases);

  f.translations.source_model_tag = "fixture";
  std::set<std::string> languages;
  for (const auto& c : spec.countries)
    if (const auto& l = f.meta.countries.at(c).major_language) languages.insert(*l);
  for (std::size_t t = 0; t < spec.n_topics; ++t)
    for (const auto& l : languages)
      f.translations.entries[{topic_ids[t], l}] = topics.at(topic_ids[t]).label + " [" + l + "]";

  auto has_family = [&](const char* name) {
    return std::find(spec.prompt_families.begin(), spec.prompt_families.end(), name) != spec.prompt_families.end();
  };
  PromptPlanOptions options;
  options.translated = has_family("translated");
  options.country_suffix = has_family("country");
  options.income_suffix = has_family("income");
  const auto variants = build_prompt_plan(f.meta, f.synonyms, &f.translations, options);
  std::map<std::string, std::size_t> topic_index;
  for (std::size_t t = 0; t < spec.n_topics; ++t) topic_index.emplace(topic_ids[t], t);
  for (const auto& variant : variants) {
    const std::size_t t = topic_index.at(variant.topic_id);
    std::vector<double> p(spec.dim, 0.0);
    if (std::holds_alternative<DefaultEnglish>(variant.family)) {
      p[t] = 1.0;
    } else {
      const double rho = rng.uniform(spec.alignment_min, spec.alignment_max);
      const double side = std::sqrt(1.0 - rho * rho);
      const auto z = rng.unit_vector(free_dims);
      p[t] = rho;
      for (std::size_t d = 0; d < free_dims; ++d) p[spec.n_topics + d] = side * z[d];
    }
    f.prompt_ids.push_back(variant.key());
    append_scaled(f.prompt_values, p, rng.uniform(0.5, 4.0));
  }

  f.planted_plan.name = "planted";
  f.planted_plan.axes = {Axis::ImageIncomeClass, Axis::Country};
  f.expected.plan = f.planted_plan.to_json();
  f.expected.columns = {std::string(kBaselineLabel)};
  for (std::size_t c = 0; c < spec.countries.size(); ++c) {
    for (std::size_t k = 0; k < 4; ++k) {
      if (dropped[c][k]) continue;
      GroupKey g{{Axis::ImageIncomeClass, std::string(to_string(kIncomeClasses[k]))},
                 {Axis::Country, spec.countries[c]}};
      f.expected.cells.push_back({g, std::string(kBaselineLabel), 1.0, 0.0, spec.n_topics});
    }
  }
  f.expected.canonicalize();
  return f;
}

void write_fixture(const Fixture& f, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_images(dir / "images.csv", f.meta.images);
  write_topics(dir / "topics.csv", f.meta.topics);
  write_countries(dir / "countries.csv", f.meta.countries);
  write_translations(dir / "translations.json", f.translations);
  nlohmann::json syn = nlohmann::json::object();
  for (const auto& [cat, list] : f.synonyms.all()) syn[std::string(to_string(cat))] = list;
  io::write_file(dir / "synonyms.json", syn.dump(2) + "\n");
  write_edges(dir / "edges.json", f.edges);
  EmbeddingStore::write_raw(dir / "image_embeddings.bin", f.dim, f.image_ids, f.image_values, f.space_tag);
  EmbeddingStore::write_raw(dir / "prompt_embeddings.bin", f.dim, f.prompt_ids, f.prompt_values, f.space_tag);
  io::write_file(dir / "spec.json", f.spec.to_json().dump(2) + "\n");
  io::write_file(dir / "planted_plan.json", f.planted_plan.to_json().dump(2) + "\n");
  io::write_file(dir / "expected_table.json", f.expected.serialize());
}

Dataset to_dataset(const Fixture& f) {
  Dataset d;
  d.meta = f.meta;
  d.image_embeddings = EmbeddingStore(f.dim, f.image_ids, f.image_values, false, f.space_tag);
  d.prompt_embeddings = EmbeddingStore(f.dim, f.prompt_ids, f.prompt_values, false, f.space_tag);
  d.synonyms = f.synonyms;
  d.edges = f.edges;
  bind_image_rows(d.meta, d.image_embeddings);
  return d;
}

}  // namespace promptstrata::fixtures
