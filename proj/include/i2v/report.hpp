#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "i2v/eval.hpp"
#include "i2v/types.hpp"

namespace i2v {

struct MethodReportRow {
  std::string method;
  InteractionType target = InteractionType::Purchase;
  std::size_t candidate_size = 0;
  HitRateReport hits;
  CoverageResult coverage;
  std::optional<double> pct_change;
  std::string baseline_name;
};

// Machine-readable key=value lines followed by a human-readable table.
inline void write_report(std::ostream& out,
                         std::span<const MethodReportRow> rows) {
  char buf[64];
  for (const MethodReportRow& r : rows) {
    out << "method=" << r.method << " target=" << to_string(r.target)
        << " K=" << r.candidate_size;
    if (r.hits.has_data()) {
      std::snprintf(buf, sizeof(buf), " hit_rate=%.6f", r.hits.average);
      out << buf;
    } else {
      out << " hit_rate=no-data";
    }
    out << " pairs=" << r.hits.evaluated << " skipped=" << r.hits.skipped;
    if (r.coverage.has_data) {
      std::snprintf(buf, sizeof(buf), " item_coverage=%.2f traffic_coverage=%.2f",
                    r.coverage.item_pct, r.coverage.traffic_pct);
      out << buf;
    }
    if (!r.baseline_name.empty()) {
      if (r.pct_change) {
        std::snprintf(buf, sizeof(buf), " pct_change_vs_%s=%+.2f",
                      r.baseline_name.c_str(), *r.pct_change);
        out << buf;
      } else {
        out << " pct_change_vs_" << r.baseline_name << "=undefined";
      }
    }
    out << '\n';
  }

  out << '\n';
  std::snprintf(buf, sizeof(buf), "%-18s %-9s %5s %10s %7s %8s", "method",
                "target", "K", "hit_rate", "pairs", "skipped");
  out << buf << "  item%  traffic%  change%\n";
  for (const MethodReportRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-18s %-9s %5zu ", r.method.c_str(),
                  std::string(to_string(r.target)).c_str(), r.candidate_size);
    out << buf;
    if (r.hits.has_data())
      std::snprintf(buf, sizeof(buf), "%10.6f", r.hits.average);
    else
      std::snprintf(buf, sizeof(buf), "%10s", "no-data");
    out << buf;
    std::snprintf(buf, sizeof(buf), " %7zu %8zu", r.hits.evaluated,
                  r.hits.skipped);
    out << buf;
    if (r.coverage.has_data)
      std::snprintf(buf, sizeof(buf), " %6.2f %9.2f", r.coverage.item_pct,
                    r.coverage.traffic_pct);
    else
      std::snprintf(buf, sizeof(buf), " %6s %9s", "-", "-");
    out << buf;
    if (r.pct_change)
      std::snprintf(buf, sizeof(buf), " %+8.2f", *r.pct_change);
    else
      std::snprintf(buf, sizeof(buf), " %8s", "-");
    out << buf << '\n';
  }
}

}  // namespace i2v
