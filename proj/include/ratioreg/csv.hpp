#pragma once

#include <string>

#include "ratioreg/alignment.hpp"

namespace ratioreg {

// CSV with header "time,value", one observation per row, LF line endings.
SampleSeries read_series_csv(const std::string& path);
void write_series_csv(const std::string& path, const SampleSeries& series);

}  // namespace ratioreg
