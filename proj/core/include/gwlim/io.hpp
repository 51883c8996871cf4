#pragma once

// File-format surface of the toolkit. Offspring laws travel as JSON
// arrays of probabilities indexed from k = 0, mechanisms as
// {"alpha": .., "beta": .., "atoms": [[size, mass], ..]}, trees as a
// truncation height plus the breadth-first child-count list. Reports
// serialize to JSON and one-row-per-statistic CSV; contour paths export
// as (time, value) CSV in scaled coordinates and as SVG polylines.
//
// All numbers are written in shortest round-trip form and nothing here
// embeds timestamps, so equal runs produce byte-identical files.

#include <filesystem>
#include <string>
#include <vector>

#include "gwlim/contour.hpp"
#include "gwlim/experiments.hpp"
#include "gwlim/gwtree.hpp"
#include "gwlim/mechanism.hpp"
#include "gwlim/offspring.hpp"

namespace gwlim {

OffspringDistribution offspring_from_json(const std::string& text);
std::string offspring_to_json(const OffspringDistribution& p);

BranchingMechanism mechanism_from_json(const std::string& text);
std::string mechanism_to_json(const BranchingMechanism& m);

OrderedTree tree_from_json(const std::string& text);
std::string tree_to_json(const OrderedTree& tree);

std::string report_to_json(const ExperimentReport& report,
                           bool include_wall_clock = false);
/// Summary CSV, one row per statistic:
/// experiment,statistic,estimate,error,kind,ok
std::string report_to_csv(const ExperimentReport& report);

std::string contour_to_csv(const ContourPath& path);

/// Fixed-viewBox polyline overlay; curves are (time, value) pairs drawn in
/// a small palette with the data box mapped onto the canvas.
struct SvgCurve {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};
std::string curves_to_svg(const std::vector<SvgCurve>& curves);
std::string contour_to_svg(const ContourPath& path);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace gwlim
