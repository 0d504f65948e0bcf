#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>

#include "ir_agent/error.hpp"
#include "ir_agent/eval/harness.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent::eval {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const std::vector<std::string> kCsvHeader = {
    "config",        "fingerprint",    "sweep_parameter", "sweep_value",    "run",
    "seed",          "examples",       "k",               "hits",           "accuracy",
    "parse_failures", "aromatic_normalized_hits", "stereo_discarded", "backend_calls",
    "fallbacks",     "short_outputs",  "input_tokens",    "output_tokens",  "calls",
    "estimated"};

}  // namespace

std::string render_markdown(std::span<const RunReport> reports) {
  std::string md = "# Evaluation report\n\n"
                   "The data split is fixed; runs differ only in the backend seed.\n";
  for (const auto& r : reports) {
    md += "\n## " + r.name + "\n\n";
    const std::size_t examples = r.runs.empty() ? 0 : r.runs.front().examples;
    md += "Fingerprint `" + r.fingerprint + "`, " + std::to_string(r.runs.size()) + " run(s) over " +
          std::to_string(examples) + " test spectra.\n\n";
    md += "| Run | Seed |";
    for (const auto k : r.ks) md += " Top-" + std::to_string(k) + " |";
    md += "\n|---|---|";
    for (std::size_t i = 0; i < r.ks.size(); ++i) md += "---|";
    md += "\n";
    for (const auto& run : r.runs) {
      md += "| " + std::to_string(run.run + 1) + " | " + std::to_string(run.seed) + " |";
      for (const auto& t : run.topk) md += " " + fixed(t.accuracy, 4) + " |";
      md += "\n";
    }
    const std::pair<const char*, double Summary::*> rows[] = {
        {"Mean", &Summary::mean}, {"Std", &Summary::stddev}, {"Min", &Summary::min}, {"Max", &Summary::max}};
    for (const auto& [label, field] : rows) {
      md += std::string("| ") + label + " | |";
      for (std::size_t i = 0; i < r.ks.size(); ++i) md += " " + fixed(r.summary(i).*field, 4) + " |";
      md += "\n";
    }
    std::size_t calls = 0, fallbacks = 0, short_outputs = 0, parse_failures = 0, aromatic_extra = 0;
    for (const auto& run : r.runs) {
      calls += run.backend_calls;
      fallbacks += run.fallbacks;
      short_outputs += run.short_outputs;
      if (!run.topk.empty()) {
        parse_failures += run.topk.back().parse_failures;
        aromatic_extra += run.topk.back().aromatic_normalized_hits - run.topk.back().hits;
      }
    }
    const auto cost = r.total_cost().total();
    const std::size_t evaluations = r.runs.size() * examples;
    md += "\nBackend calls: " + std::to_string(calls);
    if (evaluations > 0) {
      md += " (" + util::format_number(static_cast<double>(calls) / static_cast<double>(evaluations)) +
            " per spectrum)";
    }
    md += ". Tokens: " + std::to_string(cost.input_tokens) + " input, " +
          std::to_string(cost.output_tokens) + " output" + (cost.estimated ? " (estimated)" : "") +
          ".\n";
    const std::string kmax = r.ks.empty() ? "" : std::to_string(r.ks.back());
    md += "Caveats: " + std::to_string(parse_failures) + " unparseable predictions in the top " +
          kmax + "; " + std::to_string(aromatic_extra) +
          " extra hits if aromatic and Kekule forms were merged; " + std::to_string(fallbacks) +
          " fallbacks; " + std::to_string(short_outputs) + " short lists.\n";
  }
  return md;
}

std::string render_csv(std::span<const RunReport> reports) {
  std::string csv;
  for (std::size_t i = 0; i < kCsvHeader.size(); ++i) csv += (i ? "," : "") + kCsvHeader[i];
  csv += "\n";
  for (const auto& r : reports) {
    for (const auto& run : r.runs) {
      const auto cost = run.cost.total();
      for (const auto& t : run.topk) {
        const std::vector<std::string> fields = {
            csv_field(r.name), r.fingerprint, csv_field(r.sweep_parameter), csv_field(r.sweep_value),
            std::to_string(run.run), std::to_string(run.seed), std::to_string(run.examples),
            std::to_string(t.k), std::to_string(t.hits), exact(t.accuracy),
            std::to_string(t.parse_failures), std::to_string(t.aromatic_normalized_hits),
            std::to_string(t.stereo_discarded), std::to_string(run.backend_calls),
            std::to_string(run.fallbacks), std::to_string(run.short_outputs),
            std::to_string(cost.input_tokens), std::to_string(cost.output_tokens),
            std::to_string(cost.calls), cost.estimated ? "1" : "0"};
        for (std::size_t i = 0; i < fields.size(); ++i) csv += (i ? "," : "") + fields[i];
        csv += "\n";
      }
    }
  }
  return csv;
}

namespace {

std::uint64_t to_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw SchemaError("expected an integer, got '" + s + "'", line);
  }
  return v;
}

double to_double(const std::string& s, std::size_t line) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw SchemaError("expected a number, got '" + s + "'", line);
  }
  return v;
}

}  // namespace

std::vector<RunReport> reports_from_csv(std::string_view text) {
  const auto table = util::parse_csv(text);
  if (table.rows.empty() || table.rows.front() != kCsvHeader) {
    throw SchemaError("raw results CSV has an unexpected header", 1);
  }
  std::vector<RunReport> reports;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const std::size_t line = table.line_numbers[i];
    if (f.size() != kCsvHeader.size()) throw SchemaError("wrong number of fields", line);
    if (reports.empty() || reports.back().name != f[0]) {
      RunReport r;
      r.name = f[0];
      r.fingerprint = f[1];
      r.sweep_parameter = f[2];
      r.sweep_value = f[3];
      reports.push_back(std::move(r));
    }
    RunReport& r = reports.back();
    const auto run_index = static_cast<std::size_t>(to_u64(f[4], line));
    if (r.runs.empty() || r.runs.back().run != run_index) {
      RunResult run;
      run.run = run_index;
      run.seed = to_u64(f[5], line);
      run.examples = static_cast<std::size_t>(to_u64(f[6], line));
      run.backend_calls = static_cast<std::size_t>(to_u64(f[13], line));
      run.fallbacks = static_cast<std::size_t>(to_u64(f[14], line));
      run.short_outputs = static_cast<std::size_t>(to_u64(f[15], line));
      run.cost.add("total", {static_cast<std::size_t>(to_u64(f[16], line)),
                             static_cast<std::size_t>(to_u64(f[17], line)),
                             static_cast<std::size_t>(to_u64(f[18], line)), f[19] == "1"});
      r.runs.push_back(std::move(run));
    }
    TopKStats t;
    t.k = static_cast<std::size_t>(to_u64(f[7], line));
    t.examples = r.runs.back().examples;
    t.hits = static_cast<std::size_t>(to_u64(f[8], line));
    t.accuracy = to_double(f[9], line);
    t.parse_failures = static_cast<std::size_t>(to_u64(f[10], line));
    t.aromatic_normalized_hits = static_cast<std::size_t>(to_u64(f[11], line));
    t.stereo_discarded = static_cast<std::size_t>(to_u64(f[12], line));
    r.runs.back().topk.push_back(t);
    if (r.runs.size() == 1) r.ks.push_back(t.k);
  }
  return reports;
}

std::map<std::string, std::string> render_sweep_svgs(std::span<const RunReport> reports) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunReport*>> groups;
  for (const auto& r : reports) {
    if (r.sweep_parameter.empty()) continue;
    if (!groups.contains(r.sweep_parameter)) order.push_back(r.sweep_parameter);
    groups[r.sweep_parameter].push_back(&r);
  }
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  constexpr double kWidth = 480, kHeight = 320, kLeft = 60, kRight = 110, kTop = 30, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::map<std::string, std::string> out;
  for (const auto& parameter : order) {
    const auto& points = groups[parameter];
    const std::size_t n = points.size();
    auto x_at = [&](std::size_t i) {
      return n == 1 ? kLeft + plot_w / 2 : kLeft + plot_w * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    auto y_at = [&](double acc) { return kTop + plot_h * (1.0 - acc); };
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) +
                      "\" height=\"" + fixed(kHeight, 0) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fixed(kLeft, 2) + "\" y=\"18\" font-size=\"13\">Mean top-K accuracy vs " +
           parameter + "</text>\n";
    svg += "<line x1=\"" + fixed(kLeft, 2) + "\" y1=\"" + fixed(kTop + plot_h, 2) + "\" x2=\"" +
           fixed(kLeft + plot_w, 2) + "\" y2=\"" + fixed(kTop + plot_h, 2) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fixed(kLeft, 2) + "\" y1=\"" + fixed(kTop, 2) + "\" x2=\"" + fixed(kLeft, 2) +
           "\" y2=\"" + fixed(kTop + plot_h, 2) + "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
      const double acc = tick / 4.0;
      svg += "<text x=\"" + fixed(kLeft - 8, 2) + "\" y=\"" + fixed(y_at(acc) + 4, 2) +
             "\" text-anchor=\"end\">" + fixed(acc, 2) + "</text>\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
      svg += "<text x=\"" + fixed(x_at(i), 2) + "\" y=\"" + fixed(kTop + plot_h + 18, 2) +
             "\" text-anchor=\"middle\">" + points[i]->sweep_value + "</text>\n";
    }
    svg += "<text x=\"" + fixed(kLeft + plot_w / 2, 2) + "\" y=\"" + fixed(kHeight - 10, 2) +
           "\" text-anchor=\"middle\">" + parameter + "</text>\n";
    const auto& ks = points.front()->ks;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const char* color = kColors[ki % std::size(kColors)];
      std::string coords;
      for (std::size_t i = 0; i < n; ++i) {
        const double acc = ki < points[i]->ks.size() ? points[i]->summary(ki).mean : 0.0;
        if (!coords.empty()) coords += ' ';
        coords += fixed(x_at(i), 2) + "," + fixed(y_at(acc), 2);
        svg += "<circle cx=\"" + fixed(x_at(i), 2) + "\" cy=\"" + fixed(y_at(acc), 2) +
               "\" r=\"3\" fill=\"" + color + "\"/>\n";
      }
      svg += "<polyline points=\"" + coords + "\" fill=\"none\" stroke=\"" + color + "\"/>\n";
      const double ly = kTop + 14.0 * static_cast<double>(ki);
      svg += "<text x=\"" + fixed(kWidth - kRight + 12, 2) + "\" y=\"" + fixed(ly + 4, 2) +
             "\" fill=\"" + color + "\">Top-" + std::to_string(ks[ki]) + "</text>\n";
    }
    svg += "</svg>\n";
    out[parameter] = std::move(svg);
  }
  return out;
}

void emit_report(std::span<const RunReport> reports, const std::filesystem::path& dir) {
  if (reports.empty()) throw DomainError("no reports to emit");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  util::write_file(dir / "report.md", render_markdown(reports));
  util::write_file(dir / "raw.csv", render_csv(reports));
  for (const auto& [parameter, svg] : render_sweep_svgs(reports)) {
    util::write_file(dir / ("sweep_" + parameter + ".svg"), svg);
  }
}

}  // namespace ir_agent::eval
