#pragma once

#include <map>
#include <string>
#include <vector>

namespace varflow::cli {

/// Parsed contour dump: sigma -> samples -> f0 per frame (0 = unvoiced).
using ContourSets = std::map<double, std::vector<std::vector<double>>>;

ContourSets read_contour_dump(const std::string& path);

/// One panel per sigma with every sample overlaid; unvoiced frames break the
/// line.
std::string render_contours_svg(const ContourSets& sets, const std::string& title);

}  // namespace varflow::cli
