#include "smctrack/svg_report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "smctrack/errors.hpp"

namespace smctrack {

std::string render_metrics_svg(const MetricsReport& report) {
  struct Bar {
    const char* label;
    double value;
  };
  const Bar bars[] = {{"MOTA", report.mota},
                      {"IDF1", report.idf1},
                      {"MT", report.mostly_tracked},
                      {"ML", report.mostly_lost},
                      {"mIoU", report.mean_matched_iou}};

  const int width = 420;
  const int height = 260;
  const int bar_width = 56;
  const int gap = 24;
  const int baseline = 210;
  const double scale = 160.0;

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"16\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"#444\"/>\n",
                baseline, width - 16, baseline);
  svg += buf;

  int x = 40;
  for (const auto& bar : bars) {
    const double clamped = std::clamp(bar.value, 0.0, 1.0);
    const int h = static_cast<int>(clamped * scale + 0.5);
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"#4878a8\"/>\n",
                  x, baseline - h, bar_width, h);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"13\" text-anchor=\"middle\" "
                  "font-family=\"sans-serif\">%s</text>\n",
                  x + bar_width / 2, baseline + 18, bar.label);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\" "
                  "font-family=\"sans-serif\">%.3f</text>\n",
                  x + bar_width / 2, baseline - h - 6, bar.value);
    svg += buf;
    x += bar_width + gap;
  }
  svg += "</svg>\n";
  return svg;
}

void write_metrics_svg(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << render_metrics_svg(report);
  if (!out) {
    throw IoError("failed while writing " + path.string());
  }
}

}  // namespace smctrack
