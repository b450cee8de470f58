#include "ratioreg/csv.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

#include "ratioreg/errors.hpp"

namespace ratioreg {

namespace {

double parse_field(const std::string& path, std::size_t line_no,
                   const std::string& field, const char* what) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(field, &consumed);
        if (consumed != field.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(path, line_no,
                         std::string("bad ") + what + " '" + field + "'");
    }
}

}  // namespace

SampleSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError(path, 1, "empty file");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "time,value") {
        throw ParseError(path, 1, "expected header 'time,value', got '" + line + "'");
    }

    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError(path, line_no, "expected 'time,value' row");
        }
        times.push_back(
            parse_field(path, line_no, line.substr(0, comma), "time"));
        values.push_back(
            parse_field(path, line_no, line.substr(comma + 1), "value"));
    }
    if (times.empty()) {
        throw ParseError(path, line_no, "no data rows");
    }

    SampleSeries series;
    series.times = Eigen::Map<Eigen::VectorXd>(times.data(),
                                               static_cast<Eigen::Index>(times.size()));
    series.values = Eigen::Map<Eigen::VectorXd>(
        values.data(), static_cast<Eigen::Index>(values.size()));
    series.validate();
    return series;
}

void write_series_csv(const std::string& path, const SampleSeries& series) {
    series.validate();
    std::ofstream out(path, std::ios::binary);  // LF endings on all platforms
    if (!out) {
        throw InputError("cannot write '" + path + "'");
    }
    out << "time,value\n";
    char buf[64];
    for (Eigen::Index i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", series.times[i],
                      series.values[i]);
        out << buf;
    }
    if (!out) {
        throw InputError("write failed for '" + path + "'");
    }
}

}  // namespace ratioreg
