#include "boxel/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>

namespace boxel {

namespace {

constexpr double kCanvas = 720.0;
constexpr double kMargin = 60.0;

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
                          "#76b7b2", "#edc948", "#9c755f", "#bab0ac", "#17becf"};

struct Mapper {
  double min_x, min_y, scale;

  double x(double v) const { return kMargin + (v - min_x) * scale; }
  // SVG y grows downward; flip so the plot reads like standard axes.
  double y(double v, double max_y) const { return kMargin + (max_y - v) * scale; }
};

void append(std::string& out, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  out += buf;
}

}  // namespace

std::string render_svg(const EmbeddingModel& model) {
  if (model.dim != 2)
    throw std::invalid_argument("render_svg: plotting requires dimension 2");

  // World bounds over every box corner and point, with a 10% pad.
  double lo_x = 0.0, hi_x = 0.0, lo_y = 0.0, hi_y = 0.0;
  bool first = true;
  auto grow = [&](double x0, double x1, double y0, double y1) {
    if (first) {
      lo_x = x0, hi_x = x1, lo_y = y0, hi_y = y1;
      first = false;
      return;
    }
    lo_x = std::min(lo_x, x0);
    hi_x = std::max(hi_x, x1);
    lo_y = std::min(lo_y, y0);
    hi_y = std::max(hi_y, y1);
  };
  auto grow_entity = [&](const std::vector<double>& centers,
                         const std::vector<double>& raw_offsets, std::size_t i,
                         bool has_offset) {
    double cx = centers[2 * i], cy = centers[2 * i + 1];
    double ox = has_offset ? std::abs(raw_offsets[2 * i]) : 0.0;
    double oy = has_offset ? std::abs(raw_offsets[2 * i + 1]) : 0.0;
    grow(cx - ox, cx + ox, cy - oy, cy + oy);
  };
  for (std::size_t i = 0; i < model.concept_names.size(); ++i)
    grow_entity(model.concept_center, model.concept_raw_offset, i, true);
  for (std::size_t i = 0; i < model.role_names.size(); ++i)
    grow_entity(model.role_center, model.role_raw_offset, i, true);
  for (std::size_t i = 0; i < model.individual_names.size(); ++i)
    grow_entity(model.individual_point, model.individual_point, i, false);
  if (first) grow(-1.0, 1.0, -1.0, 1.0);

  double span_x = std::max(hi_x - lo_x, 1e-6);
  double span_y = std::max(hi_y - lo_y, 1e-6);
  double pad = 0.1 * std::max(span_x, span_y);
  lo_x -= pad, hi_x += pad, lo_y -= pad, hi_y += pad;
  double usable = kCanvas - 2.0 * kMargin;
  double scale = usable / std::max(hi_x - lo_x, hi_y - lo_y);
  Mapper map{lo_x, lo_y, scale};

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  append(out,
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
         "viewBox=\"0 0 %.0f %.0f\">\n",
         kCanvas, kCanvas, kCanvas, kCanvas);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  for (std::size_t i = 0; i < model.concept_names.size(); ++i) {
    double cx = model.concept_center[2 * i], cy = model.concept_center[2 * i + 1];
    double ox = std::abs(model.concept_raw_offset[2 * i]);
    double oy = std::abs(model.concept_raw_offset[2 * i + 1]);
    double x = map.x(cx - ox), y = map.y(cy + oy, hi_y);
    double w = std::max(2.0 * ox * scale, 1.0), h = std::max(2.0 * oy * scale, 1.0);
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    append(out,
           "<rect class=\"concept\" x=\"%.4f\" y=\"%.4f\" width=\"%.4f\" height=\"%.4f\" "
           "fill=\"%s\" fill-opacity=\"0.25\" stroke=\"%s\" stroke-width=\"1.5\"/>\n",
           x, y, w, h, color, color);
    append(out, "<text x=\"%.4f\" y=\"%.4f\" font-size=\"13\" fill=\"%s\">%s</text>\n",
           x + 3.0, y - 4.0, color, model.concept_names[i].c_str());
  }

  for (std::size_t i = 0; i < model.role_names.size(); ++i) {
    double cx = model.role_center[2 * i], cy = model.role_center[2 * i + 1];
    double ox = std::abs(model.role_raw_offset[2 * i]);
    double oy = std::abs(model.role_raw_offset[2 * i + 1]);
    double x = map.x(cx - ox), y = map.y(cy + oy, hi_y);
    double w = std::max(2.0 * ox * scale, 1.0), h = std::max(2.0 * oy * scale, 1.0);
    append(out,
           "<rect class=\"role\" x=\"%.4f\" y=\"%.4f\" width=\"%.4f\" height=\"%.4f\" "
           "fill=\"none\" stroke=\"#333333\" stroke-width=\"1.5\" "
           "stroke-dasharray=\"6 3\"/>\n",
           x, y, w, h);
    append(out,
           "<text x=\"%.4f\" y=\"%.4f\" font-size=\"13\" font-style=\"italic\" "
           "fill=\"#333333\">%s</text>\n",
           x + 3.0, y + 14.0, model.role_names[i].c_str());
  }

  for (std::size_t i = 0; i < model.individual_names.size(); ++i) {
    double x = map.x(model.individual_point[2 * i]);
    double y = map.y(model.individual_point[2 * i + 1], hi_y);
    append(out,
           "<circle class=\"individual\" cx=\"%.4f\" cy=\"%.4f\" r=\"3\" "
           "fill=\"#000000\"/>\n",
           x, y);
    append(out, "<text x=\"%.4f\" y=\"%.4f\" font-size=\"12\" fill=\"#000000\">%s</text>\n",
           x + 5.0, y - 5.0, model.individual_names[i].c_str());
  }

  out += "</svg>\n";
  return out;
}

}  // namespace boxel
