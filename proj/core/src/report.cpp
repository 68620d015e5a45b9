#include "promptstrata/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "csv.hpp"
#include "io.hpp"
#include "promptstrata/error.hpp"

namespace promptstrata {

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "md") return ReportFormat::Markdown;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  return std::nullopt;
}

std::string_view extension(ReportFormat f) {
  switch (f) {
    case ReportFormat::Markdown: return "md";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
  }
  return "txt";
}

std::string format_percent(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", value * 100.0);
  std::string s(buf);
  if (s == "-0.0") s = "0.0";
  return s;
}

std::string format_cell(double recall, double delta) {
  std::string d = format_percent(delta);
  if (d.front() != '-') d.insert(d.begin(), '+');
  return format_percent(recall) + " (" + d + ")";
}

namespace {

std::vector<GroupKey> distinct_groups(const RecallTable& table) {
  std::vector<GroupKey> groups;
  for (const auto& c : table.cells) groups.push_back(c.group);
  std::sort(groups.begin(), groups.end(), group_less);
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  return groups;
}

std::string md_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

std::string md_grid(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out = md_row(header);
  out += "|";
  for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
  out += "\n";
  for (const auto& r : rows) out += md_row(r);
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv::escape(fields[i]);
  }
  return out + "\n";
}

std::string plan_name(const RecallTable& table) {
  if (table.plan.is_object() && table.plan.contains("name") && table.plan["name"].is_string())
    return table.plan["name"].get<std::string>();
  return "recall";
}

std::string render_markdown(const RecallTable& table, GridLayout layout) {
  const auto groups = distinct_groups(table);
  const auto axes = table.axes();
  std::vector<std::string> columns;
  for (const auto& c : table.columns)
    if (c != kBaselineLabel) columns.push_back(c);
  const bool baseline_only = columns.empty();
  if (baseline_only) columns.emplace_back(kBaselineLabel);

  if (layout == GridLayout::Auto) {
    const bool by_country = std::find(axes.begin(), axes.end(), Axis::Country) != axes.end();
    layout = (!by_country && groups.size() <= 8) ? GridLayout::GroupsAsColumns : GridLayout::GroupsAsRows;
  }
  auto cell_text = [&](const GroupKey& g, const std::string& col) -> std::string {
    const auto* cell = table.find(g, col);
    if (cell == nullptr) return "-";
    return baseline_only ? format_percent(cell->recall) : format_cell(cell->recall, cell->delta);
  };
  std::string axis_names;
  for (auto a : axes) axis_names += (axis_names.empty() ? "" : "/") + std::string(to_string(a));
  if (axis_names.empty()) axis_names = "group";

  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  if (layout == GridLayout::GroupsAsColumns) {
    header.push_back("prompt \\ " + axis_names);
    for (const auto& g : groups) header.push_back(group_label(g));
    for (const auto& col : columns) {
      std::vector<std::string> row{col};
      for (const auto& g : groups) row.push_back(cell_text(g, col));
      rows.push_back(std::move(row));
    }
  } else {
    header.push_back(axis_names);
    for (const auto& col : columns) header.push_back(col);
    for (const auto& g : groups) {
      std::vector<std::string> row{group_label(g)};
      for (const auto& col : columns) row.push_back(cell_text(g, col));
      rows.push_back(std::move(row));
    }
  }
  return "## " + plan_name(table) + "\n\n" + md_grid(header, rows);
}

std::string render_csv(const RecallTable& table) {
  std::vector<std::string> header;
  for (auto a : table.axes()) header.emplace_back(to_string(a));
  for (const char* f : {"prompt", "recall", "delta", "topic_count"}) header.emplace_back(f);
  std::string out = csv_line(header);
  auto sorted = table;
  sorted.canonicalize();
  for (const auto& c : sorted.cells) {
    std::vector<std::string> row;
    for (const auto& [axis, value] : c.group) row.push_back(value);
    row.push_back(c.prompt);
    row.push_back(io::format_double(c.recall));
    row.push_back(io::format_double(c.delta));
    row.push_back(std::to_string(c.topic_count));
    out += csv_line(row);
  }
  return out;
}

}  // namespace

std::string render_table(const RecallTable& table, ReportFormat format, GridLayout layout) {
  if (table.cells.empty()) throw Error(ErrorKind::EmptyTable, "table '" + plan_name(table) + "' has no cells");
  switch (format) {
    case ReportFormat::Markdown: return render_markdown(table, layout);
    case ReportFormat::Csv: return render_csv(table);
    case ReportFormat::Json: return table.serialize();
  }
  return {};
}

// ---------------------------------------------------------------------------
// Heatmap

void HeatmapMatrix::compute_markers(const std::map<std::string, std::string>& native_language) {
  markers.clear();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    HeatmapMarker m;
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& v = values[r][c];
      if (!v) continue;
      if (!best || *v > *values[r][*best] || (*v == *values[r][*best] && cols[c] < cols[*best])) best = c;
    }
    if (best) m.best = cols[*best];
    if (auto it = native_language.find(rows[r]); it != native_language.end()) {
      if (std::find(cols.begin(), cols.end(), it->second) != cols.end()) m.native = it->second;
    }
    m.both = m.native && m.best && *m.native == *m.best;
    markers.emplace(rows[r], m);
  }
}

nlohmann::json HeatmapMatrix::to_json() const {
  nlohmann::json j;
  j["rows"] = rows;
  j["cols"] = cols;
  j["values"] = nlohmann::json::array();
  for (const auto& row : values) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& v : row) r.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    j["values"].push_back(r);
  }
  j["markers"] = nlohmann::json::object();
  for (const auto& [row, m] : markers) {
    j["markers"][row] = {{"native", m.native ? nlohmann::json(*m.native) : nlohmann::json(nullptr)},
                         {"best", m.best ? nlohmann::json(*m.best) : nlohmann::json(nullptr)},
                         {"both", m.both}};
  }
  return j;
}

HeatmapMatrix build_heatmap(const RecallTable& table, const CountryTable& countries) {
  const auto axes = table.axes();
  if (axes.size() != 1 || axes.front() != Axis::Country) {
    throw Error(ErrorKind::MissingAxis, "heatmap needs a table grouped by country alone", "country");
  }
  constexpr std::string_view prefix = "translated:";
  std::set<std::string> langs;
  for (const auto& c : table.columns) {
    if (c.rfind(prefix, 0) != 0) continue;
    const auto lang = c.substr(prefix.size());
    if (lang == "avg" || lang.find('+') != std::string::npos) continue;
    langs.insert(lang);
  }
  if (langs.empty()) {
    throw Error(ErrorKind::MissingAxis, "heatmap needs per-language translated columns", "language");
  }
  HeatmapMatrix h;
  h.cols.assign(langs.begin(), langs.end());
  std::set<std::string> codes;
  for (const auto& c : table.cells)
    if (c.prompt.rfind(prefix, 0) == 0 && langs.count(c.prompt.substr(prefix.size())))
      codes.insert(c.group.front().second);
  h.rows.assign(codes.begin(), codes.end());
  std::map<std::string, std::string> native;
  for (const auto& code : h.rows) {
    h.values.emplace_back(h.cols.size());
    for (std::size_t c = 0; c < h.cols.size(); ++c) {
      if (const auto* cell = table.find({{Axis::Country, code}}, std::string(prefix) + h.cols[c]))
        h.values.back()[c] = cell->recall;
    }
    if (const auto* p = countries.find(code); p && p->major_language) native.emplace(code, *p->major_language);
  }
  h.compute_markers(native);
  return h;
}

std::string render_heatmap(const HeatmapMatrix& h, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: return h.to_json().dump(2) + "\n";
    case ReportFormat::Csv: {
      std::vector<std::string> header{"country"};
      header.insert(header.end(), h.cols.begin(), h.cols.end());
      header.insert(header.end(), {"native", "best", "both"});
      std::string out = csv_line(header);
      for (std::size_t r = 0; r < h.rows.size(); ++r) {
        std::vector<std::string> row{h.rows[r]};
        for (const auto& v : h.values[r]) row.push_back(v ? io::format_double(*v) : "");
        const auto& m = h.markers.at(h.rows[r]);
        row.push_back(m.native.value_or(""));
        row.push_back(m.best.value_or(""));
        row.push_back(m.both ? "1" : "0");
        out += csv_line(row);
      }
      return out;
    }
    case ReportFormat::Markdown: {
      std::vector<std::string> header{"country"};
      header.insert(header.end(), h.cols.begin(), h.cols.end());
      std::vector<std::vector<std::string>> rows;
      for (std::size_t r = 0; r < h.rows.size(); ++r) {
        const auto& m = h.markers.at(h.rows[r]);
        std::vector<std::string> row{h.rows[r]};
        for (std::size_t c = 0; c < h.cols.size(); ++c) {
          const auto& v = h.values[r][c];
          if (!v) {
            row.emplace_back("-");
            continue;
          }
          std::string text = format_percent(*v);
          if (m.native == h.cols[c]) text = "_" + text + "_";
          if (m.best == h.cols[c]) text = "**" + text + "**";
          row.push_back(std::move(text));
        }
        rows.push_back(std::move(row));
      }
      return "## heatmap\n\n" + md_grid(header, rows) +
             "\n**bold**: best language; _italic_: native language\n";
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Significance

namespace {

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", p);
  return buf;
}

}  // namespace

std::string render_significance(const std::vector<SignificanceRow>& rows, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& r : rows) {
        nlohmann::json j{{"plan", r.plan}, {"intervention", r.intervention}};
        if (r.result) j["result"] = r.result->to_json();
        else j["result"] = nullptr;
        if (!r.note.empty()) j["note"] = r.note;
        out.push_back(std::move(j));
      }
      return out.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
      std::string out = csv_line({"plan", "intervention", "n", "w", "p", "significant", "method", "note"});
      for (const auto& r : rows) {
        if (r.result) {
          out += csv_line({r.plan, r.intervention, std::to_string(r.result->n_effective),
                           io::format_double(r.result->w_statistic), io::format_double(r.result->p_value),
                           r.result->significant ? "yes" : "no", std::string(to_string(r.result->method)),
                           r.note});
        } else {
          out += csv_line({r.plan, r.intervention, "", "", "", "", "", r.note});
        }
      }
      return out;
    }
    case ReportFormat::Markdown: {
      std::vector<std::vector<std::string>> body;
      for (const auto& r : rows) {
        if (r.result) {
          body.push_back({r.plan, r.intervention, std::to_string(r.result->n_effective),
                          format_p(r.result->p_value), r.result->significant ? "yes" : "no"});
        } else {
          body.push_back({r.plan, r.intervention, "-", "-", r.note});
        }
      }
      return "## wilcoxon signed-rank vs default\n\n" +
             md_grid({"plan", "prompt", "n", "p-value", "significant"}, body);
    }
  }
  return {};
}

}  // namespace promptstrata
