#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "necklab/error.hpp"
#include "necklab/harness.hpp"

namespace necklab {

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);  // no "-0"
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> header = {
      "l",           "cylinder_length",  "n_t",           "slope",
      "re_alpha",    "im_alpha",         "alpha_drift",   "e_neck",
      "l_neck",      "neck_length",      "neck_fraction", "predicted_energy",
      "predicted_length", "energy_scale", "length_scale", "im_scale",
      "residual_energy", "residual_length", "iterations", "final_residual",
      "converged",   "bounds_pass",      "failure"};
  return header;
}

std::string to_csv(const std::vector<RecordRow>& rows) {
  std::string out;
  const auto& h = csv_header();
  for (std::size_t k = 0; k < h.size(); ++k) out += (k ? "," : "") + h[k];
  out += '\n';
  for (const auto& r : rows) {
    const std::vector<std::string> cells = {
        format_double(r.l), format_double(r.cylinder_length), std::to_string(r.n_t),
        format_double(r.slope), format_double(r.alpha.real()), format_double(r.alpha.imag()),
        format_double(r.alpha_drift), format_double(r.e_neck), format_double(r.l_neck),
        format_double(r.neck_length), format_double(r.neck_fraction),
        format_double(r.predicted_energy), format_double(r.predicted_length),
        format_double(r.energy_scale), format_double(r.length_scale), format_double(r.im_scale),
        format_double(r.residual_energy), format_double(r.residual_length),
        std::to_string(r.iterations), format_double(r.final_residual),
        r.converged ? "true" : "false", r.bounds_pass ? "true" : "false", csv_quote(r.failure)};
    for (std::size_t k = 0; k < cells.size(); ++k) out += (k ? "," : "") + cells[k];
    out += '\n';
  }
  return out;
}

nlohmann::json rows_to_json(const std::vector<RecordRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"l", r.l},
                   {"cylinder_length", r.cylinder_length},
                   {"n_t", r.n_t},
                   {"slope", r.slope},
                   {"re_alpha", r.alpha.real()},
                   {"im_alpha", r.alpha.imag()},
                   {"alpha_drift", r.alpha_drift},
                   {"e_neck", r.e_neck},
                   {"l_neck", r.l_neck},
                   {"neck_length", r.neck_length},
                   {"neck_fraction", r.neck_fraction},
                   {"predicted_energy", r.predicted_energy},
                   {"predicted_length", r.predicted_length},
                   {"energy_scale", r.energy_scale},
                   {"length_scale", r.length_scale},
                   {"im_scale", r.im_scale},
                   {"residual_energy", r.residual_energy},
                   {"residual_length", r.residual_length},
                   {"iterations", r.iterations},
                   {"final_residual", r.final_residual},
                   {"converged", r.converged},
                   {"bounds_pass", r.bounds_pass},
                   {"failure", r.failure}});
  }
  return arr;
}

std::vector<RecordRow> rows_from_json(const nlohmann::json& j) {
  std::vector<RecordRow> rows;
  for (const auto& o : j) {
    RecordRow r;
    r.l = o.at("l");
    r.cylinder_length = o.at("cylinder_length");
    r.n_t = o.at("n_t");
    r.slope = o.at("slope");
    r.alpha = {o.at("re_alpha").get<double>(), o.at("im_alpha").get<double>()};
    r.alpha_drift = o.at("alpha_drift");
    r.e_neck = o.at("e_neck");
    r.l_neck = o.at("l_neck");
    r.neck_length = o.at("neck_length");
    r.neck_fraction = o.at("neck_fraction");
    r.predicted_energy = o.at("predicted_energy");
    r.predicted_length = o.at("predicted_length");
    r.energy_scale = o.at("energy_scale");
    r.length_scale = o.at("length_scale");
    r.im_scale = o.at("im_scale");
    r.residual_energy = o.at("residual_energy");
    r.residual_length = o.at("residual_length");
    r.iterations = o.at("iterations");
    r.final_residual = o.at("final_residual");
    r.converged = o.at("converged");
    r.bounds_pass = o.at("bounds_pass");
    r.failure = o.at("failure");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  os << text;
  if (!os) throw Error(ErrorCode::IoError, "failed to write " + path.string());
}

void export_table(const std::vector<RecordRow>& rows, TableFormat format,
                  const std::filesystem::path& path) {
  if (rows.empty()) throw Error(ErrorCode::IoError, "refusing to export an empty table");
  write_text(path, format == TableFormat::Csv ? to_csv(rows) : rows_to_json(rows).dump(2) + "\n");
}

std::string render_svg(const std::vector<Series>& series, const std::string& title) {
  if (series.empty()) throw Error(ErrorCode::InvalidArgument, "no series to plot");
  std::vector<std::vector<std::pair<double, double>>> kept;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    if (s.points.size() < 2) {
      throw Error(ErrorCode::InvalidArgument, "series '" + s.name + "' has fewer than two points");
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, y] : s.points) {
      if (!(x > 0.0 && y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) continue;
      pts.emplace_back(std::log10(x), std::log10(y));
      x0 = std::min(x0, pts.back().first);
      x1 = std::max(x1, pts.back().first);
      y0 = std::min(y0, pts.back().second);
      y1 = std::max(y1, pts.back().second);
    }
    kept.push_back(std::move(pts));
  }
  if (!(x1 > x0)) throw Error(ErrorCode::DegenerateAxis, "all x values coincide");
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }

  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  const auto px = [&](double lx) { return kLeft + (lx - x0) / (x1 - x0) * pw; };
  const auto py = [&](double ly) { return kTop + (1.0 - (ly - y0) / (y1 - y0)) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                kW, kH, kW, kH);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">",
                kLeft);
  out += buf + xml_escape(title) + "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                kLeft, kTop, pw, ph);
  out += buf;
  // Decade ticks on both axes.
  for (int d = static_cast<int>(std::ceil(x0 - 1e-12)); d <= static_cast<int>(std::floor(x1 + 1e-12)); ++d) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ccc\"/>"
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" "
                  "text-anchor=\"middle\">1e%d</text>\n",
                  px(d), kTop, px(d), kTop + ph, px(d), kTop + ph + 16, d);
    out += buf;
  }
  for (int d = static_cast<int>(std::ceil(y0 - 1e-12)); d <= static_cast<int>(std::floor(y1 + 1e-12)); ++d) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ccc\"/>"
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" "
                  "text-anchor=\"end\">1e%d</text>\n",
                  kLeft, py(d), kLeft + pw, py(d), kLeft - 6, py(d) + 4, d);
    out += buf;
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % std::size(colors)];
    out += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"";
    out += color;
    out += "\" points=\"";
    for (std::size_t k = 0; k < kept[s].size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", k ? " " : "", px(kept[s][k].first),
                    py(kept[s][k].second));
      out += buf;
    }
    out += "\"/>\n";
    const double ly = kTop + 16 + 20.0 * static_cast<double>(s);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" "
                  "stroke-width=\"2\"/><text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" "
                  "font-size=\"12\">",
                  kW - kRight + 15, ly, kW - kRight + 40, ly, color, kW - kRight + 46, ly + 4);
    out += buf + xml_escape(series[s].name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace necklab
