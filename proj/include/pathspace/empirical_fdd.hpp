#pragma once

#include <charconv>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pathspace/discrete_measure.hpp"

namespace pathspace {

/// A finite-dimensional sample of a process: N draws of the vector
/// (X_{t_1}, ..., X_{t_k}), stored row-major.
class EmpiricalFdd {
  public:
    EmpiricalFdd(std::vector<double> times, std::vector<double> samples, std::string source)
        : times_(std::move(times)), samples_(std::move(samples)), source_(std::move(source)) {
        if (times_.empty()) throw std::invalid_argument("EmpiricalFdd: at least one sampling time required");
        for (std::size_t i = 1; i < times_.size(); ++i) {
            if (!(times_[i - 1] < times_[i])) {
                throw std::invalid_argument("EmpiricalFdd: times must be strictly increasing");
            }
        }
        if (samples_.empty() || samples_.size() % times_.size() != 0) {
            throw std::invalid_argument("EmpiricalFdd: samples must hold N >= 1 complete rows");
        }
    }

    const std::vector<double>& times() const { return times_; }
    std::size_t dim() const { return times_.size(); }
    std::size_t rows() const { return samples_.size() / times_.size(); }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(samples_.data() + i * times_.size(), times_.size());
    }
    const std::vector<double>& samples() const { return samples_; }
    const std::string& source() const { return source_; }

    /// Empirical measure of the rows (weight 1/N each; duplicate rows merge).
    DiscreteMeasure to_measure() const {
        std::vector<std::vector<double>> atoms(rows());
        for (std::size_t i = 0; i < rows(); ++i) {
            auto r = row(i);
            atoms[i].assign(r.begin(), r.end());
        }
        std::vector<double> w(rows(), 1.0 / static_cast<double>(rows()));
        return DiscreteMeasure(std::move(atoms), std::move(w));
    }

  private:
    std::vector<double> times_;
    std::vector<double> samples_;  // rows() * dim(), row-major
    std::string source_;
};

namespace detail {

/// Shortest decimal form that round-trips to the same double.
inline std::string shortest_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("shortest_double: formatting failed");
    return std::string(buf, p);
}

} // namespace detail

/// CSV with one column per sampling time (headers t_<time>), one row per draw.
inline void fdd_to_csv(const EmpiricalFdd& fdd, std::ostream& out) {
    out.precision(17);
    for (std::size_t c = 0; c < fdd.dim(); ++c) {
        out << (c ? "," : "") << "t_" << detail::shortest_double(fdd.times()[c]);
    }
    out << "\n";
    for (std::size_t i = 0; i < fdd.rows(); ++i) {
        auto r = fdd.row(i);
        for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
        out << "\n";
    }
    if (!out) throw std::runtime_error("fdd_to_csv: write failed");
}

inline EmpiricalFdd fdd_from_csv(std::istream& in, std::string source = "csv") {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("fdd_from_csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<double> times;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) comma = line.size();
        std::string cell = line.substr(start, comma - start);
        if (cell.size() < 3 || cell[0] != 't' || cell[1] != '_') {
            throw std::runtime_error("fdd_from_csv: header cells must look like t_<time>");
        }
        times.push_back(std::stod(cell.substr(2)));
        start = comma + 1;
        if (comma == line.size()) break;
    }
    std::vector<double> samples;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<double> row = detail::parse_csv_numbers(line, "fdd_from_csv");
        if (row.size() != times.size()) throw std::runtime_error("fdd_from_csv: row width does not match header");
        samples.insert(samples.end(), row.begin(), row.end());
    }
    return EmpiricalFdd(std::move(times), std::move(samples), std::move(source));
}

} // namespace pathspace
