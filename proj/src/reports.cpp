#include "fae/reports.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fae/errors.hpp"

namespace fae {
namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw ParseError("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_loss_csv(const std::string& path, const TrainReport& report) {
  auto out = open_out(path);
  const bool hierarchy = report.method == "hfae";
  std::size_t groups = 0;
  if (hierarchy && !report.epochs.empty()) groups = report.epochs.front().terms.size() - 1;
  out << "epoch,term1,term2,l1,total,val_total";
  for (std::size_t g = 1; g <= groups; ++g) out << ",group" << g;
  out << '\n';
  for (const auto& e : report.epochs) {
    double masked = 0.0;
    for (std::size_t t = 1; t < e.terms.size(); ++t) masked += e.terms[t];
    out << e.epoch << ',' << format_real(e.terms.empty() ? 0.0 : e.terms[0]) << ','
        << format_real(masked) << ',' << format_real(e.l1) << ',' << format_real(e.total) << ','
        << format_real(e.val_total);
    for (std::size_t g = 1; g <= groups; ++g) out << ',' << format_real(e.terms[g]);
    out << '\n';
  }
  if (!out) throw ParseError("write failed for '" + path + "'");
}

void write_selection_csv(const std::string& path, const SelectionResult& sel) {
  auto out = open_out(path);
  out << "rank,feature,weight\n";
  for (std::size_t i = 0; i < sel.indices.size(); ++i) {
    out << i + 1 << ',' << sel.indices[i] << ',' << format_real(sel.weights[i]) << '\n';
  }
}

void write_hierarchy_csv(const std::string& path, const HierarchicalSelection& sel) {
  auto out = open_out(path);
  out << "group,feature,weight\n";
  for (std::size_t g = 0; g < sel.groups.size(); ++g) {
    const auto& group = sel.groups[g];
    for (std::size_t i = 0; i < group.indices.size(); ++i) {
      out << g + 1 << ',' << group.indices[i] << ',' << format_real(group.weights[i]) << '\n';
    }
  }
}

std::string format_metrics_row(const MetricsRow& row) {
  return row.dataset + ',' + row.method + ',' + std::to_string(row.k) + ',' +
         std::to_string(row.seed) + ',' + format_real(row.recon_mse) + ',' +
         format_real(row.accuracy);
}

void append_metrics_row(const std::string& path, const MetricsRow& row) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  auto out = open_out(path, std::ios::app);
  if (fresh) out << kMetricsHeader << '\n';
  out << format_metrics_row(row) << '\n';
  if (!out) throw ParseError("write failed for '" + path + "'");
}

}  // namespace fae
