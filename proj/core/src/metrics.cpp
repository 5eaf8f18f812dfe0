#include "spectrack/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spectrack/checkpoint.hpp"
#include "spectrack/error.hpp"

namespace spectrack {

double iou(const Box& a, const Box& b) noexcept {
  const double iw = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double center_error(const Box& a, const Box& b) noexcept {
  return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError(std::string(what) + ": non-finite value at frame " + std::to_string(i));
    }
  }
}

}  // namespace

MetricCurve success_auc(std::span<const double> ious) {
  if (ious.empty()) throw DomainError("success_auc: no frames");
  require_finite(ious, "success_auc");
  MetricCurve c;
  c.name = "success";
  const double n = static_cast<double>(ious.size());
  double total = 0.0;
  for (int k = 0; k <= 50; ++k) {
    const double t = k / 50.0;
    const auto hits = std::count_if(ious.begin(), ious.end(), [t](double v) { return v >= t; });
    const double v = static_cast<double>(hits) / n;
    c.thresholds.push_back(t);
    c.values.push_back(v);
    total += v;
  }
  c.summary = total / 51.0;
  return c;
}

double dp_at(std::span<const double> errors, double tau) {
  if (errors.empty()) throw DomainError("dp_at: no frames");
  require_finite(errors, "dp_at");
  const auto hits = std::count_if(errors.begin(), errors.end(), [tau](double e) { return e <= tau; });
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

MetricCurve precision_curve(std::span<const double> errors, double tau, int max_px) {
  MetricCurve c;
  c.name = "precision";
  for (int k = 0; k <= max_px; ++k) {
    c.thresholds.push_back(k);
    c.values.push_back(dp_at(errors, k));
  }
  c.summary = dp_at(errors, tau);
  return c;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

void emit_plot(std::span<const MetricCurve> curves, const std::filesystem::path& path,
               const std::string& title) {
  if (curves.empty()) throw DomainError("emit_plot: no curves");
  double x_max = 1.0;
  for (const auto& c : curves) {
    if (c.thresholds.size() != c.values.size()) {
      throw DimensionError("emit_plot: curve '" + c.name + "' has mismatched lengths");
    }
    for (double t : c.thresholds) x_max = std::max(x_max, t);
  }
  if (x_max > 1.0) x_max = 50.0;

  std::ostringstream csv;
  csv << "curve,threshold,value\n";
  for (const auto& c : curves) {
    if (c.name.find_first_of(",\n") != std::string::npos) {
      throw DomainError("emit_plot: curve name '" + c.name + "' contains a comma or newline");
    }
    for (std::size_t i = 0; i < c.values.size(); ++i)
      csv << c.name << ',' << format_double(c.thresholds[i]) << ',' << format_double(c.values[i]) << '\n';
  }
  auto csv_path = path;
  csv_path += ".csv";
  const std::string csv_text = csv.str();
  write_file(csv_path, std::vector<std::uint8_t>(csv_text.begin(), csv_text.end()));

  constexpr double W = 480, H = 360, L = 50, R = 20, T = 30, B = 40;
  auto px = [&](double t) { return L + (W - L - R) * t / x_max; };
  auto py = [&](double v) { return H - B - (H - T - B) * v; };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) svg << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << px(x_max) << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << L << "\" y2=\"" << py(1)
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double t = x_max * k / 5.0;
    svg << "<text x=\"" << px(t) << "\" y=\"" << H - B + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
        << t << "</text>\n";
    svg << "<text x=\"" << L - 6 << "\" y=\"" << py(k / 5.0) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
        << k / 5.0 << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 6 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << (x_max > 1.0 ? "location error threshold (px)" : "overlap threshold") << "</text>\n";
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    const char* color = kPalette[ci % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < c.values.size(); ++i) svg << px(c.thresholds[i]) << ',' << py(c.values[i]) << ' ';
    svg << "\"/>\n";
    char label[128];
    std::snprintf(label, sizeof label, "%s [%.3f]", c.name.c_str(), c.summary);
    const double ly = T + 16.0 * static_cast<double>(ci + 1);
    svg << "<line x1=\"" << W - 170 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - 150 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << W - 145 << "\" y=\"" << ly << "\" font-size=\"11\">" << label << "</text>\n";
  }
  svg << "</svg>\n";
  auto svg_path = path;
  svg_path += ".svg";
  const std::string svg_text = svg.str();
  write_file(svg_path, std::vector<std::uint8_t>(svg_text.begin(), svg_text.end()));
}

std::vector<MetricCurve> read_curves_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "curve,threshold,value") {
    throw ParseError("'" + path.string() + "': missing curve,threshold,value header");
  }
  std::vector<MetricCurve> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw ParseError("'" + path.string() + "' line " + std::to_string(lineno) + ": expected 3 fields");
    }
    const std::string name = line.substr(0, a);
    double t = 0, v = 0;
    const auto r1 = std::from_chars(line.data() + a + 1, line.data() + b, t);
    const auto r2 = std::from_chars(line.data() + b + 1, line.data() + line.size(), v);
    if (r1.ec != std::errc() || r2.ec != std::errc()) {
      throw ParseError("'" + path.string() + "' line " + std::to_string(lineno) + ": bad number");
    }
    if (out.empty() || out.back().name != name) out.push_back({name, {}, {}, 0.0});
    out.back().thresholds.push_back(t);
    out.back().values.push_back(v);
  }
  return out;
}

nlohmann::json to_json(const TrackingResult& result) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const Box& b : result.boxes) boxes.push_back({b.x, b.y, b.w, b.h});
  return {{"sequence", result.sequence}, {"modality", result.modality}, {"boxes", boxes}};
}

TrackingResult result_from_json(const nlohmann::json& j) {
  TrackingResult r;
  try {
    r.sequence = j.at("sequence").get<std::string>();
    r.modality = j.at("modality").get<std::string>();
    for (const auto& b : j.at("boxes")) {
      if (b.size() != 4) throw ParseError("result boxes must be [x, y, w, h]");
      r.boxes.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed result file: ") + e.what());
  }
  return r;
}

void save_result(const TrackingResult& result, const std::filesystem::path& path) {
  const std::string text = to_json(result).dump(2) + "\n";
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

TrackingResult load_result(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return result_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

SequenceScore score_sequence(const TrackingResult& result, std::span<const Box> ground_truth) {
  if (result.boxes.size() != ground_truth.size()) {
    throw DimensionError("sequence '" + result.sequence + "': " + std::to_string(result.boxes.size()) +
                         " predicted boxes for " + std::to_string(ground_truth.size()) + " frames");
  }
  SequenceScore s;
  s.sequence = result.sequence;
  s.modality = result.modality;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    s.ious.push_back(iou(result.boxes[i], ground_truth[i]));
    s.center_errors.push_back(center_error(result.boxes[i], ground_truth[i]));
  }
  s.auc = success_auc(s.ious).summary;
  s.dp20 = dp_at(s.center_errors, 20.0);
  double total = 0.0;
  for (double v : s.ious) total += v;
  s.mean_iou = total / static_cast<double>(s.ious.size());
  return s;
}

}  // namespace spectrack
