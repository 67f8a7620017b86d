#include "contatt/pipeline/export.hpp"

#include "contatt/errors.hpp"
#include "contatt/pipeline/csv.hpp"

namespace contatt::pipeline {

DensityExport export_density(const AttentionDensity& density, int grid_points) {
  if (grid_points < 2) {
    throw ArgumentError("export grid needs at least two points");
  }
  const Interval dom = density.base().domain();
  DensityExport out;
  out.csv = "t,pdf_q,pdf_lebesgue\n";
  for (int i = 0; i < grid_points; ++i) {
    const double t = i + 1 == grid_points ? dom.hi : dom.lo + dom.length() * static_cast<double>(i) / (grid_points - 1);
    out.csv += format_double(t) + ',' + format_double(density_eval(density, t, Measure::q)) + ',' +
               format_double(density_eval(density, t, Measure::lebesgue)) + '\n';
  }
  if (const DeformedDensity* d = density.as_deformed()) {
    std::string listing = "lo,hi\n";
    for (const auto& piece : d->support.intervals) {
      listing += format_double(piece.lo) + ',' + format_double(piece.hi) + '\n';
    }
    out.support = std::move(listing);
  }
  return out;
}

void write_density_export(const std::string& path, const DensityExport& exported) {
  write_text_file(path, exported.csv);
  if (exported.support) {
    write_text_file(path + ".support.txt", *exported.support);
  }
}

} // namespace contatt::pipeline
