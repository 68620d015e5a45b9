#include "promptstrata/pipeline.hpp"

#include <algorithm>
#include <set>

#include "io.hpp"
#include "promptstrata/error.hpp"
#include "promptstrata/hashing.hpp"
#include "promptstrata/stats.hpp"

namespace promptstrata {

namespace {

constexpr const char* kToolVersion = "promptstrata 0.1.0";

bool heatmap_shaped(const RecallTable& table) {
  const auto axes = table.axes();
  if (axes.size() != 1 || axes.front() != Axis::Country) return false;
  return std::any_of(table.columns.begin(), table.columns.end(), [](const std::string& c) {
    return c.rfind("translated:", 0) == 0 && c != "translated:avg" && c.find('+') == std::string::npos;
  });
}

std::map<std::string, std::filesystem::path> input_files(const RunConfig& config) {
  const auto& l = config.layout;
  std::map<std::string, std::filesystem::path> in{{"images", l.images},
                                                  {"topics", l.topics},
                                                  {"image_embeddings", l.image_embeddings},
                                                  {"image_embeddings_header", sidecar_path(l.image_embeddings)},
                                                  {"prompt_embeddings", l.prompt_embeddings},
                                                  {"prompt_embeddings_header", sidecar_path(l.prompt_embeddings)}};
  if (l.countries) in.emplace("countries", *l.countries);
  if (l.translations) in.emplace("translations", *l.translations);
  if (l.synonyms) in.emplace("synonyms", *l.synonyms);
  if (l.edges && !config.load.edges) in.emplace("edges", *l.edges);
  for (const auto& [role, path] : config.extra_inputs) in.emplace(role, path);
  return in;
}

}  // namespace

std::vector<SignificanceRow> significance_tests(const std::vector<RecallTable>& tables) {
  std::vector<SignificanceRow> rows;
  for (const auto& table : tables) {
    const auto axes = table.axes();
    if (axes.size() != 1 || axes.front() != Axis::Country) continue;
    const std::string plan = table.plan.value("name", "");
    for (const auto& column : table.columns) {
      if (column == kBaselineLabel) continue;
      SignificanceRow row{plan, column, std::nullopt, {}};
      const auto pairs = paired_recalls(table, column);
      try {
        row.result = wilcoxon_signed_rank(pairs.baseline, pairs.intervention);
      } catch (const Error& e) {
        row.note = std::string(to_string(e.kind()));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

nlohmann::json build_manifest(const RunConfig& config, const Dataset& data,
                              const std::vector<std::filesystem::path>& outputs) {
  nlohmann::json m;
  m["tool"] = kToolVersion;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [role, path] : input_files(config)) {
    inputs[role] = {{"file", path.filename().string()}, {"sha256", sha256_file(path)}};
  }
  m["inputs"] = inputs;
  m["synonym_hash"] = data.synonyms.hash();
  m["edges"] = {{"e1", data.edges.e1}, {"e2", data.edges.e2}, {"e3", data.edges.e3},
                {"source", config.edges_source},
                {"population", config.load.edge_population == EdgePopulation::All ? "all" : "filtered"}};
  m["plans"] = nlohmann::json::array();
  for (const auto& p : config.plans) m["plans"].push_back(p.to_json());
  nlohmann::json out = nlohmann::json::object();
  for (const auto& rel : outputs) out[rel.generic_string()] = sha256_file(config.out_dir / rel);
  m["outputs"] = out;
  return m;
}

RunOutcome run_eval(const RunConfig& config) {
  if (config.workers == 0) throw Error(ErrorKind::BadArgument, "--workers must be at least 1");
  if (config.plans.empty()) throw Error(ErrorKind::BadArgument, "no experiment plans to run");
  std::set<std::string> names;
  for (const auto& p : config.plans) {
    p.validate();
    if (!names.insert(p.name).second) {
      throw Error(ErrorKind::InvalidPlan, "two plans are named '" + p.name + "'", p.name);
    }
  }

  const Dataset data = load_dataset(config.layout, config.load);
  RunOutcome outcome;
  for (const auto& plan : config.plans) {
    outcome.tables.push_back(run_experiment(plan, data, EngineOptions{config.workers}));
  }
  outcome.significance = significance_tests(outcome.tables);

  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::filesystem::path& rel, const std::string& bytes) {
    io::write_file(config.out_dir / rel, bytes);
    written.push_back(rel);
  };
  std::string report;
  for (const auto& table : outcome.tables) {
    const std::string name = table.plan.value("name", "table");
    const bool has_cells = !table.cells.empty();
    for (auto format : config.formats) {
      if (!has_cells && format != ReportFormat::Json) continue;
      emit(std::filesystem::path("tables") / (name + "." + std::string(extension(format))),
           format == ReportFormat::Json ? table.serialize() : render_table(table, format));
    }
    if (has_cells) report += render_table(table, ReportFormat::Markdown) + "\n";
    if (has_cells && heatmap_shaped(table)) {
      const auto heatmap = build_heatmap(table, data.meta.countries);
      for (auto format : config.formats) {
        emit(std::filesystem::path("heatmaps") / (name + "." + std::string(extension(format))),
             render_heatmap(heatmap, format));
      }
      report += render_heatmap(heatmap, ReportFormat::Markdown) + "\n";
    }
  }
  nlohmann::json stats;
  stats["pairing_unit"] = "one pair per country: recall on the plan's filtered images";
  stats["zero_handling"] = "drop";
  stats["alpha"] = kAlpha;
  stats["alternative"] = "two-sided";
  stats["tests"] = nlohmann::json::parse(render_significance(outcome.significance, ReportFormat::Json));
  emit("stats.json", stats.dump(2) + "\n");
  const std::string stats_md = render_significance(outcome.significance, ReportFormat::Markdown);
  emit("stats.md", stats_md);
  report += stats_md;
  emit("report.md", report);

  std::sort(written.begin(), written.end());
  io::write_file(config.out_dir / "manifest.json", build_manifest(config, data, written).dump(2) + "\n");
  outcome.artifacts = written;
  outcome.artifacts.push_back("manifest.json");
  std::sort(outcome.artifacts.begin(), outcome.artifacts.end());
  return outcome;
}

nlohmann::json validate_layout(const DataLayout& layout) {
  nlohmann::json summary;
  nlohmann::json warnings = nlohmann::json::array();
  Metadata meta = load_metadata({layout.images, layout.topics, layout.countries});
  std::size_t subjective = 0;
  for (const auto& [id, t] : meta.topics.entries()) subjective += t.subjective ? 1 : 0;
  summary["images"] = meta.images.size();
  summary["topics"] = meta.topics.size();
  summary["subjective_topics"] = subjective;
  summary["countries"] = meta.countries.size();

  std::optional<TranslationManifest> translations;
  if (layout.translations) {
    translations = load_translations(*layout.translations);
    summary["translations"] = translations->entries.size();
  }
  SynonymSet synonyms = layout.synonyms ? SynonymSet::load(*layout.synonyms) : SynonymSet::defaults();
  summary["synonym_hash"] = synonyms.hash();
  if (layout.edges) {
    const auto e = load_edges(*layout.edges);
    summary["edges"] = {{"e1", e.e1}, {"e2", e.e2}, {"e3", e.e3}};
  }

  std::optional<EmbeddingStore> images, prompts;
  if (std::filesystem::exists(layout.image_embeddings)) {
    images = EmbeddingStore::load(layout.image_embeddings);
    bind_image_rows(meta, *images);
    summary["image_embeddings"] = {{"rows", images->rows()}, {"dim", images->dim()},
                                   {"space_tag", images->space_tag()}};
    if (images->renormalized_rows() > 0) {
      warnings.push_back(std::to_string(images->renormalized_rows()) + " image rows were renormalized");
    }
  }
  if (std::filesystem::exists(layout.prompt_embeddings)) {
    prompts = EmbeddingStore::load(layout.prompt_embeddings);
    summary["prompt_embeddings"] = {{"rows", prompts->rows()}, {"dim", prompts->dim()},
                                    {"space_tag", prompts->space_tag()}};
    if (prompts->renormalized_rows() > 0) {
      warnings.push_back(std::to_string(prompts->renormalized_rows()) + " prompt rows were renormalized");
    }
  }
  if (images && prompts) check_compatible(*images, *prompts);
  if (prompts) {
    PromptPlanOptions options;
    options.translated = translations.has_value();
    auto plan = build_prompt_plan(meta, synonyms, translations ? &*translations : nullptr, options);
    std::size_t unresolved = 0;
    for (const auto& v : plan) unresolved += prompts->find(v.key()) ? 0 : 1;
    summary["planned_prompts"] = plan.size();
    if (unresolved > 0) {
      warnings.push_back(std::to_string(unresolved) + " planned prompts have no embedding row");
    }
  }
  summary["warnings"] = warnings;
  return summary;
}

}  // namespace promptstrata
