#include <cstdio>
#include <sstream>

#include "ecglite/error.hpp"
#include "ecglite/eval.hpp"
#include "io_util.hpp"

namespace ecglite::eval {

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string s;
  for (std::size_t j = 0; j < cm.classes(); ++j) {
    if (j) s += ',';
    s += class_name(kAllClasses[j]);
  }
  s += '\n';
  for (std::size_t i = 0; i < cm.classes(); ++i) {
    for (std::size_t j = 0; j < cm.classes(); ++j) {
      if (j) s += ',';
      s += std::to_string(cm.at(i, j));
    }
    s += '\n';
  }
  return s;
}

std::string metrics_csv(const EvalReport& r) {
  std::string s = "class,acc,se,sp,auc,support\n";
  auto row = [&](std::string_view name, const std::optional<double>& acc, const std::optional<double>& se,
                 const std::optional<double>& sp, const std::optional<double>& auc, std::size_t support) {
    s += std::string(name) + ',' + format_rate(acc) + ',' + format_rate(se) + ',' + format_rate(sp) + ',' +
         format_rate(auc) + ',' + std::to_string(support) + '\n';
  };
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& m = r.per_class[c];
    row(class_name(kAllClasses[c]), m.acc, m.se, m.sp, m.auc, m.support);
  }
  const std::size_t total = r.cm.total();
  row("macro", r.macro_acc, r.macro_se, r.macro_sp, r.macro_auc, total);
  row("overall", r.overall_acc, std::nullopt, std::nullopt, std::nullopt, total);
  return s;
}

std::string roc_csv(const std::vector<RocPoint>& pts) {
  std::string s = "fpr,tpr\n";
  for (const auto& p : pts) s += fixed4(p.fpr) + ',' + fixed4(p.tpr) + '\n';
  return s;
}

std::string confusion_svg(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes();
  const int cell = 48, margin = 70;
  const int size = margin + static_cast<int>(k) * cell + 10;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<text x=\"" << margin << "\" y=\"14\">predicted</text>\n";
  o << "<text x=\"4\" y=\"" << margin - 6 << "\">true</text>\n";
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t row = 0;
    for (std::size_t j = 0; j < k; ++j) row += cm.at(i, j);
    const int y = margin + static_cast<int>(i) * cell;
    o << "<text x=\"4\" y=\"" << y + cell / 2 + 4 << "\">" << class_name(kAllClasses[i]) << "</text>\n";
    o << "<text x=\"" << margin + static_cast<int>(i) * cell + 4 << "\" y=\"" << margin - 24 << "\">"
      << class_name(kAllClasses[i]) << "</text>\n";
    for (std::size_t j = 0; j < k; ++j) {
      const double frac = row ? static_cast<double>(cm.at(i, j)) / static_cast<double>(row) : 0.0;
      const int shade = 255 - static_cast<int>(frac * 200.0);
      const int x = margin + static_cast<int>(j) * cell;
      o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
        << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\" stroke=\"#999\"/>\n";
      o << "<text x=\"" << x + 4 << "\" y=\"" << y + cell / 2 + 4 << "\">" << cm.at(i, j) << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

std::string roc_svg(const EvalReport& r) {
  static constexpr const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};
  const double side = 300.0, off = 40.0;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"460\" height=\"380\" font-family=\"sans-serif\" "
       "font-size=\"11\">\n";
  o << "<rect x=\"" << off << "\" y=\"" << off << "\" width=\"" << side << "\" height=\"" << side
    << "\" fill=\"none\" stroke=\"#000\"/>\n";
  o << "<line x1=\"" << off << "\" y1=\"" << off + side << "\" x2=\"" << off + side << "\" y2=\"" << off
    << "\" stroke=\"#ccc\" stroke-dasharray=\"4\"/>\n";
  o << "<text x=\"" << off + side / 2 - 10 << "\" y=\"" << off + side + 28 << "\">FPR</text>\n";
  o << "<text x=\"6\" y=\"" << off + side / 2 << "\">TPR</text>\n";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& m = r.per_class[c];
    const double ly = off + 12.0 + 14.0 * static_cast<double>(c);
    o << "<text x=\"" << off + side + 12 << "\" y=\"" << ly << "\" fill=\"" << colors[c] << "\">"
      << class_name(kAllClasses[c]) << " AUC " << format_rate(m.auc) << "</text>\n";
    if (m.roc.empty()) continue;
    o << "<polyline fill=\"none\" stroke=\"" << colors[c] << "\" points=\"";
    for (const auto& p : m.roc) {
      o << fixed4(off + p.fpr * side) << ',' << fixed4(off + side - p.tpr * side) << ' ';
    }
    o << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::optional<double> parse_cell(const std::string& cell) {
  if (cell == "NA") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw ParseError("bad number '" + cell + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad number '" + cell + "'");
  }
}

}  // namespace

std::string format_rate(const std::optional<double>& v) { return v ? fixed4(*v) : "NA"; }

void emit_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  io::write_text(dir / "confusion.csv", confusion_csv(report.cm));
  io::write_text(dir / "metrics.csv", metrics_csv(report));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto path = dir / ("roc_" + std::string(class_name(kAllClasses[c])) + ".csv");
    io::write_text(path, roc_csv(report.per_class[c].roc));
  }
  io::write_text(dir / "confusion.svg", confusion_svg(report.cm));
  io::write_text(dir / "roc.svg", roc_svg(report));
  if (report.latency || report.model_bytes) {
    std::string s = "iterations,mean_ms,p50_ms,p95_ms,model_bytes\n";
    const auto& l = report.latency;
    s += (l ? std::to_string(l->iterations) : "NA") + ',' + (l ? fixed4(l->mean_ms) : "NA") + ',' +
         (l ? fixed4(l->p50_ms) : "NA") + ',' + (l ? fixed4(l->p95_ms) : "NA") + ',' +
         (report.model_bytes ? std::to_string(*report.model_bytes) : "NA") + '\n';
    io::write_text(dir / "latency.csv", s);
  }
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "class,acc,se,sp,auc,support") throw ParseError("unexpected metrics header", 1);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw ParseError("expected 6 columns", line_no);
    try {
      rows.push_back({cells[0], parse_cell(cells[1]), parse_cell(cells[2]), parse_cell(cells[3]),
                      parse_cell(cells[4]), static_cast<std::size_t>(std::stoull(cells[5]))});
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    } catch (const std::logic_error&) {
      throw ParseError("bad support count", line_no);
    }
  }
  return rows;
}

}  // namespace ecglite::eval
