// promptstrata: stratified recall evaluation of attribute-integrated prompts.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "promptstrata/dataset.hpp"
#include "promptstrata/error.hpp"
#include "promptstrata/fixtures.hpp"
#include "promptstrata/pipeline.hpp"
#include "promptstrata/plan.hpp"
#include "promptstrata/prompts.hpp"
#include "promptstrata/report.hpp"
#include "promptstrata/stats.hpp"

namespace fs = std::filesystem;
using namespace promptstrata;

namespace {

struct PathOverrides {
  std::string data;
  std::string images, topics, countries, translations, synonyms, image_embeddings, prompt_embeddings;

  void attach(CLI::App* cmd) {
    cmd->add_option("--data", data, "Data directory (default: $PROMPTSTRATA_DATA_DIR)");
    cmd->add_option("--images", images, "Image metadata CSV");
    cmd->add_option("--topics", topics, "Topic catalog CSV");
    cmd->add_option("--countries", countries, "Country reference CSV (bundled table when absent)");
    cmd->add_option("--translations", translations, "Translation manifest JSON");
    cmd->add_option("--synonyms", synonyms, "Income synonym JSON");
    cmd->add_option("--image-embeddings", image_embeddings, "Image embedding payload (.bin)");
    cmd->add_option("--prompt-embeddings", prompt_embeddings, "Prompt embedding payload (.bin)");
  }

  DataLayout layout() const {
    std::string root = data;
    if (root.empty()) {
      if (const char* env = std::getenv("PROMPTSTRATA_DATA_DIR")) root = env;
    }
    const bool all_explicit = !images.empty() && !topics.empty();
    if (root.empty() && !all_explicit) {
      throw Error(ErrorKind::BadArgument, "no data directory: pass --data or set PROMPTSTRATA_DATA_DIR");
    }
    DataLayout l = root.empty() ? DataLayout{} : DataLayout::in_directory(root);
    if (!images.empty()) l.images = images;
    if (!topics.empty()) l.topics = topics;
    if (!countries.empty()) l.countries = fs::path(countries);
    if (!translations.empty()) l.translations = fs::path(translations);
    if (!synonyms.empty()) l.synonyms = fs::path(synonyms);
    if (!image_embeddings.empty()) l.image_embeddings = image_embeddings;
    if (!prompt_embeddings.empty()) l.prompt_embeddings = prompt_embeddings;
    return l;
  }
};

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string(), path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, path.string() + ": invalid JSON: " + e.what(), path.string());
  }
}

void write_output(const std::string& out, const std::string& bytes) {
  if (out.empty() || out == "-") {
    std::cout << bytes;
    return;
  }
  const fs::path p(out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoFailure, "cannot write " + out, out);
  f << bytes;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadArgument, "not a number: '" + item + "'", item);
    }
  }
  return out;
}

int fail(const Error& e) {
  nlohmann::json j{{"error", to_string(e.kind())},
                   {"message", e.what()},
                   {"subject", e.subject()},
                   {"exit_code", exit_code(e.kind())}};
  std::cerr << j.dump() << "\n";
  return exit_code(e.kind());
}

const std::map<std::string, Aggregation> kAggregations{{"macro", Aggregation::Macro}, {"micro", Aggregation::Micro}};
const std::map<std::string, GtScope> kGtScopes{{"pool", GtScope::Pool}, {"group", GtScope::Group}};
const std::map<std::string, EdgePopulation> kPopulations{{"all", EdgePopulation::All},
                                                         {"filtered", EdgePopulation::Filtered}};
const std::map<std::string, WilcoxonMethod> kMethods{{"auto", WilcoxonMethod::Auto},
                                                     {"exact", WilcoxonMethod::ExactEnumeration},
                                                     {"normal", WilcoxonMethod::NormalApproximation}};

std::vector<ExperimentPlan> plans_for(const std::string& preset, Aggregation agg, GtScope scope) {
  std::vector<ExperimentPlan> plans;
  if (preset == "all") {
    for (auto p : {Preset::Rq1, Preset::Rq2, Preset::Rq3}) {
      auto more = preset_plans(p, agg, scope);
      plans.insert(plans.end(), more.begin(), more.end());
    }
    return plans;
  }
  auto p = parse_preset(preset);
  if (!p) throw Error(ErrorKind::BadArgument, "unknown preset '" + preset + "'", preset);
  return preset_plans(*p, agg, scope);
}

std::vector<ExperimentPlan> plans_from_file(const fs::path& path, std::optional<Aggregation> agg,
                                            std::optional<GtScope> scope) {
  const auto doc = read_json(path);
  std::vector<ExperimentPlan> plans;
  if (doc.is_array()) {
    for (const auto& p : doc) plans.push_back(ExperimentPlan::from_json(p));
  } else {
    plans.push_back(ExperimentPlan::from_json(doc));
  }
  for (auto& p : plans) {
    if (agg) p.aggregation = *agg;
    if (scope) p.gt_scope = *scope;
  }
  return plans;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"promptstrata: stratified retrieval recall for attribute-integrated prompts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "promptstrata 0.1.0");

  // validate
  auto* validate = app.add_subcommand("validate", "Check input files against the ingest formats");
  PathOverrides validate_paths;
  validate_paths.attach(validate);
  bool strict = false;
  validate->add_flag("--strict", strict, "Exit 1 when there are warnings");

  // plan
  auto* plan = app.add_subcommand("plan", "Export the prompt plan, or a preset's experiment plans");
  PathOverrides plan_paths;
  plan_paths.attach(plan);
  std::vector<std::string> families{"default", "translated", "country", "income"};
  std::string plan_out;
  std::string plan_preset;
  plan->add_option("--families", families, "Prompt families to include")
      ->delimiter(',')
      ->check(CLI::IsMember({"default", "translated", "country", "income"}));
  plan->add_option("--experiments", plan_preset, "Print the experiment plans of a preset instead")
      ->check(CLI::IsMember({"rq1", "rq2", "rq3", "all"}));
  plan->add_option("--out", plan_out, "Output file (default: stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate experiment plans and write artifacts");
  PathOverrides eval_paths;
  eval_paths.attach(eval);
  std::string preset, plan_file, out_dir, edges, population = "all";
  std::string aggregation, gt_scope;
  std::size_t workers = 1;
  std::vector<std::string> formats{"json", "md", "csv"};
  auto* preset_opt = eval->add_option("--preset", preset, "Preset plans")->check(CLI::IsMember({"rq1", "rq2", "rq3", "all"}));
  auto* plan_opt = eval->add_option("--plan", plan_file, "Experiment plan JSON (object or array)");
  preset_opt->excludes(plan_opt);
  eval->add_option("--out", out_dir, "Output directory")->required();
  eval->add_option("--workers", workers, "Engine worker threads")->check(CLI::PositiveNumber);
  eval->add_option("--aggregation", aggregation, "macro (default) or micro")->check(CLI::IsMember({"macro", "micro"}));
  eval->add_option("--gt-scope", gt_scope, "pool (default) or group")->check(CLI::IsMember({"pool", "group"}));
  eval->add_option("--edges", edges, "Edges JSON path, or 'dollar-street' for the bundled preset");
  eval->add_option("--edges-population", population, "Incomes used to compute edges: all or filtered")
      ->check(CLI::IsMember({"all", "filtered"}));
  eval->add_option("--format", formats, "Rendered formats")->delimiter(',')->check(CLI::IsMember({"json", "md", "csv"}));

  // stats
  auto* stats = app.add_subcommand("stats", "Wilcoxon signed-rank tests");
  std::string stats_table, sample_a, sample_b, method = "auto", stats_out;
  std::vector<std::string> stats_columns;
  auto* table_opt = stats->add_option("--table", stats_table, "RecallTable JSON; tests each column against default");
  stats->add_option("--column", stats_columns, "Restrict to these columns")->needs(table_opt);
  auto* a_opt = stats->add_option("--a", sample_a, "Comma-separated baseline sample");
  auto* b_opt = stats->add_option("--b", sample_b, "Comma-separated intervention sample");
  a_opt->needs(b_opt);
  b_opt->needs(a_opt);
  table_opt->excludes(a_opt);
  stats->add_option("--method", method, "auto, exact or normal")->check(CLI::IsMember({"auto", "exact", "normal"}));
  stats->add_option("--out", stats_out, "Output file (default: stdout)");

  // report
  auto* report = app.add_subcommand("report", "Render a RecallTable");
  std::string report_table, report_format = "md", report_out, layout = "auto", report_countries;
  bool heatmap = false;
  report->add_option("--table", report_table, "RecallTable JSON")->required();
  report->add_option("--format", report_format, "md, csv or json")->check(CLI::IsMember({"md", "csv", "json"}));
  report->add_option("--layout", layout, "auto, columns or rows")->check(CLI::IsMember({"auto", "columns", "rows"}));
  report->add_flag("--heatmap", heatmap, "Render the country x language heatmap");
  report->add_option("--countries", report_countries, "Country reference CSV for native markers");
  report->add_option("--out", report_out, "Output file (default: stdout)");

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Generate a synthetic dataset with planted structure");
  std::uint64_t seed = 0;
  std::string spec_file, fixture_out;
  fixtures::PlantedSpec spec;
  fixture->add_option("--seed", seed, "64-bit seed")->required();
  fixture->add_option("--spec", spec_file, "PlantedSpec JSON; flags override its fields");
  fixture->add_option("--out", fixture_out, "Output directory")->required();
  auto* o_topics = fixture->add_option("--topics", spec.n_topics, "Number of topics");
  auto* o_ips = fixture->add_option("--images-per-stratum", spec.images_per_stratum, "Images per (topic, country, class)");
  auto* o_dim = fixture->add_option("--dim", spec.dim, "Embedding dimension");
  auto* o_margin = fixture->add_option("--margin", spec.margin, "Aligned-prompt score gap");
  auto* o_noise = fixture->add_option("--noise", spec.noise_scale, "Off-topic component bound");
  auto* o_countries = fixture->add_option("--countries", spec.countries, "Country codes")->delimiter(',');
  auto* o_dropout = fixture->add_option("--dropout", spec.stratum_dropout, "Probability of an empty stratum");
  auto* o_subjective = fixture->add_option("--subjective-topics", spec.subjective_topics, "Extra subjective topics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(Error(ErrorKind::BadArgument, e.what()));
  }

  try {
    if (validate->parsed()) {
      const auto summary = validate_layout(validate_paths.layout());
      std::cout << summary.dump(2) << "\n";
      if (strict && !summary["warnings"].empty()) {
        throw Error(ErrorKind::SchemaViolation, "validation produced warnings");
      }
      return 0;
    }

    if (plan->parsed()) {
      if (!plan_preset.empty()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& p : plans_for(plan_preset, Aggregation::Macro, GtScope::Pool)) out.push_back(p.to_json());
        write_output(plan_out, out.dump(2) + "\n");
        return 0;
      }
      const auto layout = plan_paths.layout();
      const auto meta = load_metadata({layout.images, layout.topics, layout.countries});
      const auto synonyms = layout.synonyms ? SynonymSet::load(*layout.synonyms) : SynonymSet::defaults();
      auto has = [&](const char* f) { return std::find(families.begin(), families.end(), f) != families.end(); };
      PromptPlanOptions options{has("default"), has("translated"), has("country"), has("income")};
      std::optional<TranslationManifest> manifest;
      if (options.translated && layout.translations) manifest = load_translations(*layout.translations);
      const auto variants = build_prompt_plan(meta, synonyms, manifest ? &*manifest : nullptr, options);
      write_output(plan_out, prompt_plan_to_json(variants).dump(2) + "\n");
      return 0;
    }

    if (eval->parsed()) {
      if (preset.empty() && plan_file.empty()) {
        throw Error(ErrorKind::BadArgument, "eval needs --preset or --plan");
      }
      RunConfig config;
      config.layout = eval_paths.layout();
      config.out_dir = out_dir;
      config.workers = workers;
      config.load.edge_population = kPopulations.at(population);
      std::optional<Aggregation> agg;
      std::optional<GtScope> scope;
      if (!aggregation.empty()) agg = kAggregations.at(aggregation);
      if (!gt_scope.empty()) scope = kGtScopes.at(gt_scope);
      if (!preset.empty()) {
        config.plans = plans_for(preset, agg.value_or(Aggregation::Macro), scope.value_or(GtScope::Pool));
      } else {
        config.plans = plans_from_file(plan_file, agg, scope);
        config.extra_inputs.emplace("plan", plan_file);
      }
      if (edges == "dollar-street") {
        config.load.edges = dollar_street_edges();
        config.edges_source = "dollar-street";
      } else if (!edges.empty()) {
        config.load.edges = load_edges(edges);
        config.extra_inputs.emplace("edges", edges);
        config.edges_source = "file";
      } else if (config.layout.edges) {
        config.edges_source = "file";
      }
      config.formats.clear();
      for (const auto& f : formats) config.formats.push_back(*parse_report_format(f));
      const auto outcome = run_eval(config);
      nlohmann::json summary{{"out", out_dir}, {"tables", nlohmann::json::array()}, {"artifacts", nlohmann::json::array()}};
      for (const auto& t : outcome.tables) summary["tables"].push_back(t.plan.value("name", ""));
      for (const auto& a : outcome.artifacts) summary["artifacts"].push_back(a.generic_string());
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (stats->parsed()) {
      const auto m = kMethods.at(method);
      if (!stats_table.empty()) {
        const auto table = RecallTable::from_json(read_json(stats_table));
        std::vector<SignificanceRow> rows;
        for (const auto& column : table.columns) {
          if (column == kBaselineLabel) continue;
          if (!stats_columns.empty() &&
              std::find(stats_columns.begin(), stats_columns.end(), column) == stats_columns.end())
            continue;
          SignificanceRow row{table.plan.value("name", ""), column, std::nullopt, {}};
          const auto pairs = paired_recalls(table, column);
          try {
            row.result = wilcoxon_signed_rank(pairs.baseline, pairs.intervention, m);
          } catch (const Error& e) {
            row.note = std::string(to_string(e.kind()));
          }
          rows.push_back(std::move(row));
        }
        write_output(stats_out, render_significance(rows, ReportFormat::Json));
        return 0;
      }
      if (sample_a.empty()) throw Error(ErrorKind::BadArgument, "stats needs --table or --a/--b");
      const auto a = parse_list(sample_a);
      const auto b = parse_list(sample_b);
      write_output(stats_out, wilcoxon_signed_rank(a, b, m).to_json().dump(2) + "\n");
      return 0;
    }

    if (report->parsed()) {
      const auto table = RecallTable::from_json(read_json(report_table));
      const auto format = *parse_report_format(report_format);
      if (heatmap) {
        const CountryTable countries =
            report_countries.empty() ? CountryTable::bundled() : load_countries(report_countries);
        write_output(report_out, render_heatmap(build_heatmap(table, countries), format));
        return 0;
      }
      const GridLayout grid = layout == "columns" ? GridLayout::GroupsAsColumns
                              : layout == "rows"  ? GridLayout::GroupsAsRows
                                                  : GridLayout::Auto;
      write_output(report_out, render_table(table, format, grid));
      return 0;
    }

    if (fixture->parsed()) {
      fixtures::PlantedSpec base;
      if (!spec_file.empty()) base = fixtures::PlantedSpec::from_json(read_json(spec_file));
      // Flags given on the command line override the spec file.
      if (o_topics->count()) base.n_topics = spec.n_topics;
      if (o_ips->count()) base.images_per_stratum = spec.images_per_stratum;
      if (o_dim->count()) base.dim = spec.dim;
      if (o_margin->count()) base.margin = spec.margin;
      if (o_noise->count()) base.noise_scale = spec.noise_scale;
      if (o_countries->count()) base.countries = spec.countries;
      if (o_dropout->count()) base.stratum_dropout = spec.stratum_dropout;
      if (o_subjective->count()) base.subjective_topics = spec.subjective_topics;
      base.seed = seed;
      const auto fx = fixtures::generate(base);
      fixtures::write_fixture(fx, fixture_out);
      std::cout << nlohmann::json{{"out", fixture_out},
                                  {"images", fx.meta.images.size()},
                                  {"prompts", fx.prompt_ids.size()},
                                  {"seed", seed}}
                       .dump(2)
                << "\n";
      return 0;
    }
  } catch (const Error& e) {
    return fail(e);
  } catch (const fs::filesystem_error& e) {
    return fail(Error(ErrorKind::IoFailure, e.what(), e.path1().string()));
  } catch (const nlohmann::json::exception& e) {
    return fail(Error(ErrorKind::SchemaViolation, e.what()));
  } catch (const std::exception& e) {
    return fail(Error(ErrorKind::SchemaViolation, e.what()));
  }
  return 0;
}
