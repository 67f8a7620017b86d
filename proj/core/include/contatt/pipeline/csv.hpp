#pragma once

#include <string>

#include "contatt/gmm_attention.hpp"
#include "contatt/value_function.hpp"

namespace contatt::pipeline {

/// Series CSV: header "time,dim_0,...,dim_{O-1}", one row per observation.
std::string series_to_csv(const TimeSeries& series);
TimeSeries series_from_csv(const std::string& text);

void write_series_csv(const std::string& path, const TimeSeries& series);
TimeSeries read_series_csv(const std::string& path);

/// Discrete attention CSV: header "t,w".
DiscreteAttention read_weights_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Fixed 17-significant-digit formatting so text output round-trips and is stable.
std::string format_double(double x);

} // namespace contatt::pipeline
