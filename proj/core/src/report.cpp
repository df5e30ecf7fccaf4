#include "markbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <vector>

#include "markbench/serialize.hpp"

namespace markbench::report {
namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "n/a" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string percent_label(double fpr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", fpr * 100.0);
  return std::string("tpr@") + buf + "%fpr";
}

std::vector<std::string> quality_columns(const eval::RobustnessReport& report) {
  std::vector<std::string> cols(std::begin(kQualityColumns), std::end(kQualityColumns));
  std::set<std::string> extra;
  for (const auto& row : report.rows) {
    for (const auto& [name, value] : row.quality) {
      if (std::find(cols.begin(), cols.end(), name) == cols.end()) extra.insert(name);
    }
  }
  cols.insert(cols.end(), extra.begin(), extra.end());
  return cols;
}

using Grid = std::vector<std::vector<std::string>>;

Grid build_grid(const eval::RobustnessReport& report) {
  const auto qcols = quality_columns(report);
  const std::string tpr_label = percent_label(report.metadata.fpr);
  Grid grid;
  std::vector<std::string> header{"transform"};
  header.insert(header.end(), qcols.begin(), qcols.end());
  for (const auto& w : report.metadata.watermark_ids) {
    header.push_back(tpr_label + ":" + w);
    header.push_back("threshold:" + w);
    header.push_back("failed:" + w);
  }
  grid.push_back(header);
  for (const auto& row : report.rows) {
    std::vector<std::string> line{row.transform_id};
    for (const auto& q : qcols) {
      const auto it = row.quality.find(q);
      line.push_back(it == row.quality.end() ? "n/a" : fmt(it->second));
    }
    for (const auto& d : row.detection) {
      line.push_back(d.negatives == 0 ? "n/a" : fmt(d.tpr));
      line.push_back(fmt(d.threshold));
      line.push_back(std::to_string(d.failed));
    }
    grid.push_back(line);
  }
  return grid;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string render_csv(const eval::RobustnessReport& report) {
  std::ostringstream os;
  for (const auto& line : build_grid(report)) {
    for (std::size_t i = 0; i < line.size(); ++i) os << (i ? "," : "") << csv_field(line[i]);
    os << '\n';
  }
  return os.str();
}

std::string render_json(const eval::RobustnessReport& report) {
  nlohmann::json j = report;
  return j.dump(2) + "\n";
}

std::string render_table(const eval::RobustnessReport& report) {
  const Grid grid = build_grid(report);
  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream os;
  const auto rule = [&] {
    for (std::size_t i = 0; i < width.size(); ++i) os << (i ? "-+-" : "") << std::string(width[i], '-');
    os << '\n';
  };
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t i = 0; i < grid[r].size(); ++i) {
      const std::string& cell = grid[r][i];
      os << (i ? " | " : "");
      if (i == 0) {
        os << cell << std::string(width[i] - cell.size(), ' ');
      } else {
        os << std::string(width[i] - cell.size(), ' ') << cell;
      }
    }
    os << '\n';
    if (r == 0) rule();
  }
  os << "corpus: " << report.metadata.corpus_size << " clips, seed " << report.metadata.seed << ", fpr "
     << report.metadata.fpr << '\n';
  return os.str();
}

std::string render_plot_data(const eval::RobustnessReport& report, const std::map<std::string, SweepPoint>& sweep,
                             const std::string& quality_metric) {
  std::ostringstream os;
  os << "codec,bitrate,watermark,tpr,quality\n";
  for (const auto& row : report.rows) {
    const auto point = sweep.find(row.transform_id);
    if (point == sweep.end()) continue;
    const auto q = row.quality.find(quality_metric);
    for (const auto& d : row.detection) {
      os << csv_field(point->second.codec) << ',' << fmt(point->second.bitrate_kbps) << ',' << csv_field(d.watermark_id)
         << ',' << (d.negatives == 0 ? "n/a" : fmt(d.tpr)) << ',' << (q == row.quality.end() ? "n/a" : fmt(q->second))
         << '\n';
    }
  }
  return os.str();
}

}  // namespace markbench::report
