#include "gwlim/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gwlim/format.hpp"

namespace gwlim {
namespace {

using nlohmann::json;

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw std::invalid_argument("malformed JSON input");
  }
  return j;
}

}  // namespace

OffspringDistribution offspring_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_array()) {
    throw std::invalid_argument("offspring law must be a JSON array");
  }
  std::vector<double> probs;
  probs.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) {
      throw std::invalid_argument("offspring probabilities must be numbers");
    }
    probs.push_back(v.get<double>());
  }
  return OffspringDistribution(std::move(probs));
}

std::string offspring_to_json(const OffspringDistribution& p) {
  std::string out = "[";
  for (std::size_t k = 0; k < p.probs().size(); ++k) {
    if (k > 0) {
      out += ",";
    }
    out += format_double(p.probs()[k]);
  }
  return out + "]";
}

BranchingMechanism mechanism_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object() || !j.contains("alpha") || !j.contains("beta")) {
    throw std::invalid_argument(
        "mechanism JSON needs {\"alpha\", \"beta\", optional \"atoms\"}");
  }
  std::vector<JumpAtom> atoms;
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2) {
        throw std::invalid_argument("each atom must be a [size, mass] pair");
      }
      atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
  }
  return BranchingMechanism(j.at("alpha").get<double>(),
                            j.at("beta").get<double>(), std::move(atoms));
}

std::string mechanism_to_json(const BranchingMechanism& m) {
  std::string out = "{\"alpha\":" + format_double(m.alpha()) +
                    ",\"beta\":" + format_double(m.beta()) + ",\"atoms\":[";
  bool first = true;
  for (const auto& a : m.atoms()) {
    if (!first) {
      out += ",";
    }
    first = false;
    out += "[" + format_double(a.size) + "," + format_double(a.mass) + "]";
  }
  return out + "]}";
}

OrderedTree tree_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object() || !j.contains("child_counts")) {
    throw std::invalid_argument(
        "tree JSON needs {\"truncation_height\", \"child_counts\"}");
  }
  std::optional<std::uint32_t> truncation;
  if (j.contains("truncation_height") && !j.at("truncation_height").is_null()) {
    truncation = j.at("truncation_height").get<std::uint32_t>();
  }
  std::vector<std::uint32_t> counts;
  for (const auto& v : j.at("child_counts")) {
    counts.push_back(v.get<std::uint32_t>());
  }
  return OrderedTree::from_bfs_counts(counts, truncation);
}

std::string tree_to_json(const OrderedTree& tree) {
  std::string out = "{\"truncation_height\":";
  if (tree.truncation_height()) {
    out += std::to_string(*tree.truncation_height());
  } else {
    out += "null";
  }
  out += ",\"child_counts\":[";
  const auto counts = tree.identity_counts();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += std::to_string(counts[i]);
  }
  return out + "]}";
}

std::string report_to_json(const ExperimentReport& report,
                           bool include_wall_clock) {
  json j;
  j["experiment"] = report.experiment;
  json params = json::object();
  for (const auto& [key, value] : report.parameters) {
    params[key] = value;
  }
  j["parameters"] = params;
  j["master_seed"] = report.master_seed;
  j["replicates"] = report.replicates;
  json stats = json::array();
  for (const auto& s : report.statistics) {
    json row;
    row["name"] = s.name;
    row["estimate"] = s.estimate;
    row["error"] = s.error;
    row["kind"] = s.exact ? "exact" : "monte-carlo";
    row["ok"] = s.ok;
    row["gating"] = s.gating;
    if (!s.note.empty()) {
      row["note"] = s.note;
    }
    stats.push_back(row);
  }
  j["statistics"] = stats;
  if (!report.curves.empty()) {
    json curves = json::array();
    for (const auto& c : report.curves) {
      json row;
      row["name"] = c.name;
      row["xs"] = c.xs;
      row["ys"] = c.ys;
      curves.push_back(row);
    }
    j["curves"] = curves;
  }
  j["verdict"] = std::string(to_string(report.verdict));
  if (include_wall_clock) {
    j["wall_clock_seconds"] = report.wall_clock_seconds;
  }
  return j.dump(2) + "\n";
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out = "experiment,statistic,estimate,error,kind,ok\n";
  for (const auto& s : report.statistics) {
    out += report.experiment + "," + s.name + "," + format_double(s.estimate) +
           "," + format_double(s.error) + "," +
           (s.exact ? "exact" : "monte-carlo") + "," + (s.ok ? "1" : "0") +
           "\n";
  }
  return out;
}

std::string contour_to_csv(const ContourPath& path) {
  std::string out = "time,value\n";
  const auto times = path.knot_times();
  const auto values = path.knot_values();
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += format_double(times[i] / path.time_scale()) + "," +
           format_double(values[i] / path.space_scale()) + "\n";
  }
  return out;
}

namespace {

constexpr double kSvgWidth = 800.0;
constexpr double kSvgHeight = 500.0;
constexpr double kSvgMargin = 40.0;

const char* svg_color(std::size_t index) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  return palette[index % 6];
}

}  // namespace

std::string curves_to_svg(const std::vector<SvgCurve>& curves) {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool seeded = false;
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.xs.size(); ++i) {
      if (!seeded) {
        x_min = x_max = c.xs[i];
        y_min = y_max = c.ys[i];
        seeded = true;
      }
      x_min = std::min(x_min, c.xs[i]);
      x_max = std::max(x_max, c.xs[i]);
      y_min = std::min(y_min, c.ys[i]);
      y_max = std::max(y_max, c.ys[i]);
    }
  }
  if (x_max == x_min) {
    x_max = x_min + 1.0;
  }
  if (y_max == y_min) {
    y_max = y_min + 1.0;
  }
  const double w = kSvgWidth - 2.0 * kSvgMargin;
  const double h = kSvgHeight - 2.0 * kSvgMargin;
  auto map_x = [&](double x) {
    return kSvgMargin + (x - x_min) / (x_max - x_min) * w;
  };
  auto map_y = [&](double y) {
    return kSvgHeight - kSvgMargin - (y - y_min) / (y_max - y_min) * h;
  };

  std::string out =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n";
  out += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  // axes
  out += "<line x1=\"" + format_double(kSvgMargin) + "\" y1=\"" +
         format_double(kSvgHeight - kSvgMargin) + "\" x2=\"" +
         format_double(kSvgWidth - kSvgMargin) + "\" y2=\"" +
         format_double(kSvgHeight - kSvgMargin) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out += "<line x1=\"" + format_double(kSvgMargin) + "\" y1=\"" +
         format_double(kSvgMargin) + "\" x2=\"" + format_double(kSvgMargin) +
         "\" y2=\"" + format_double(kSvgHeight - kSvgMargin) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  std::size_t idx = 0;
  for (const auto& c : curves) {
    out += "<polyline fill=\"none\" stroke=\"";
    out += svg_color(idx);
    out += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < c.xs.size(); ++i) {
      if (i > 0) {
        out += " ";
      }
      out += format_double(map_x(c.xs[i])) + "," + format_double(map_y(c.ys[i]));
    }
    out += "\"/>\n";
    if (!c.label.empty()) {
      out += "<text x=\"" + format_double(kSvgWidth - kSvgMargin - 150.0) +
             "\" y=\"" + format_double(kSvgMargin + 16.0 * (idx + 1)) +
             "\" fill=\"";
      out += svg_color(idx);
      out += "\" font-size=\"13\">" + c.label + "</text>\n";
    }
    ++idx;
  }
  out += "</svg>\n";
  return out;
}

std::string contour_to_svg(const ContourPath& path) {
  SvgCurve curve;
  curve.label = "contour";
  const auto times = path.knot_times();
  const auto values = path.knot_values();
  for (std::size_t i = 0; i < times.size(); ++i) {
    curve.xs.push_back(times[i] / path.time_scale());
    curve.ys.push_back(values[i] / path.space_scale());
  }
  return curves_to_svg({curve});
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gwlim
