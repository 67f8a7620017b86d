#pragma once

#include <optional>
#include <string>

#include "contatt/densities.hpp"

namespace contatt::pipeline {

/// CSV with header "t,pdf_q,pdf_lebesgue" over `grid_points` evenly spaced
/// points of the base domain. Sparse densities also get a support listing,
/// one "lo,hi" interval per line.
struct DensityExport {
  std::string csv;
  std::optional<std::string> support;
};

DensityExport export_density(const AttentionDensity& density, int grid_points);

/// Writes `path` and, for sparse densities, `path + ".support.txt"`.
void write_density_export(const std::string& path, const DensityExport& exported);

} // namespace contatt::pipeline
