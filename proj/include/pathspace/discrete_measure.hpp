#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathspace {

/// Choice of metric on R^k for measure-level distances. The sup-norm is the
/// default throughout: coordinate projections are then 1-Lipschitz with the
/// exact product-set enlargement identity that marginal monotonicity needs.
enum class Norm { sup, euclidean };

inline double atom_distance(std::span<const double> a, std::span<const double> b, Norm norm) {
    if (a.size() != b.size()) throw std::domain_error("atom_distance: dimension mismatch");
    if (norm == Norm::sup) {
        double best = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::abs(a[i] - b[i]));
        return best;
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

/// Finitely supported probability measure on R^k. Construction canonicalizes:
/// atoms are sorted lexicographically and exact duplicates merge their
/// weights, so equal measures have equal representations.
class DiscreteMeasure {
  public:
    DiscreteMeasure(std::vector<std::vector<double>> atoms, std::vector<double> weights) {
        if (atoms.empty()) throw std::invalid_argument("DiscreteMeasure: at least one atom required");
        if (atoms.size() != weights.size()) {
            throw std::invalid_argument("DiscreteMeasure: one weight per atom required");
        }
        dim_ = atoms.front().size();
        if (dim_ == 0) throw std::invalid_argument("DiscreteMeasure: atoms must have dimension >= 1");
        double total = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (atoms[i].size() != dim_) {
                throw std::invalid_argument("DiscreteMeasure: atoms must share one dimension");
            }
            for (double c : atoms[i]) {
                if (!std::isfinite(c)) throw std::invalid_argument("DiscreteMeasure: atom coordinates must be finite");
            }
            if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
                throw std::invalid_argument("DiscreteMeasure: weights must be positive and finite");
            }
            total += weights[i];
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw std::domain_error("DiscreteMeasure: weights must sum to 1 within 1e-12");
        }

        std::vector<std::size_t> order(atoms.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            if (atoms[i] != atoms[j]) return atoms[i] < atoms[j];
            return i < j;
        });
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const auto& atom = atoms[order[pos]];
            if (pos > 0 && atom == atoms[order[pos - 1]]) {
                weights_.back() += weights[order[pos]];
            } else {
                flat_.insert(flat_.end(), atom.begin(), atom.end());
                weights_.push_back(weights[order[pos]]);
            }
        }
    }

    std::size_t size() const { return weights_.size(); }
    std::size_t dim() const { return dim_; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    std::span<const double> atom(std::size_t i) const {
        return std::span<const double>(flat_.data() + i * dim_, dim_);
    }

    bool operator==(const DiscreteMeasure& other) const {
        return dim_ == other.dim_ && flat_ == other.flat_ && weights_ == other.weights_;
    }

  private:
    std::size_t dim_ = 0;
    std::vector<double> flat_;   // size() * dim(), row per atom, canonical order
    std::vector<double> weights_;
};

/// Dirac measure at a point.
inline DiscreteMeasure dirac(std::vector<double> atom) {
    return DiscreteMeasure({std::move(atom)}, {1.0});
}

/// Empirical measure of the given points, weight 1/N each (duplicates merge).
inline DiscreteMeasure empirical_measure(const std::vector<std::vector<double>>& points) {
    if (points.empty()) throw std::invalid_argument("empirical_measure: at least one point required");
    std::vector<double> w(points.size(), 1.0 / static_cast<double>(points.size()));
    return DiscreteMeasure(points, std::move(w));
}

/// Pushforward of mu under the coordinate projection selecting `coords`
/// (1-based indices into {1..dim}). Atoms that land on the same point merge
/// their weights.
inline DiscreteMeasure project_marginal(const DiscreteMeasure& mu, const std::vector<std::size_t>& coords) {
    if (coords.empty()) throw std::domain_error("project_marginal: coordinate set must be nonempty");
    for (std::size_t c : coords) {
        if (c < 1 || c > mu.dim()) throw std::domain_error("project_marginal: coordinate index out of range");
    }
    std::vector<std::vector<double>> atoms(mu.size());
    std::vector<double> weights(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        auto a = mu.atom(i);
        atoms[i].reserve(coords.size());
        for (std::size_t c : coords) atoms[i].push_back(a[c - 1]);
        weights[i] = mu.weight(i);
    }
    return DiscreteMeasure(std::move(atoms), std::move(weights));
}

/// Serializes as CSV with header w,x1..xk, one atom per row.
inline void measure_to_csv(const DiscreteMeasure& mu, std::ostream& out) {
    out << "w";
    for (std::size_t c = 1; c <= mu.dim(); ++c) out << ",x" << c;
    out << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        out << mu.weight(i);
        for (double c : mu.atom(i)) out << "," << c;
        out << "\n";
    }
    if (!out) throw std::runtime_error("measure_to_csv: write failed");
}

namespace detail {

inline std::vector<double> parse_csv_numbers(const std::string& line, const char* what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) comma = line.size();
        const std::string cell = line.substr(start, comma - start);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            throw std::runtime_error(std::string(what) + ": malformed numeric cell '" + cell + "'");
        }
        while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
        if (used != cell.size()) {
            throw std::runtime_error(std::string(what) + ": malformed numeric cell '" + cell + "'");
        }
        out.push_back(v);
        start = comma + 1;
        if (comma == line.size()) break;
    }
    return out;
}

inline bool csv_line_is_header(const std::string& line) {
    return line.find_first_not_of("0123456789+-.eE, \t\r") != std::string::npos;
}

} // namespace detail

/// Parses the w,x1..xk CSV format. A leading header row is optional; every
/// data row is a weight followed by dim coordinates.
inline DiscreteMeasure measure_from_csv(std::istream& in) {
    std::vector<std::vector<double>> atoms;
    std::vector<double> weights;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && detail::csv_line_is_header(line)) {
            first = false;
            continue;
        }
        first = false;
        std::vector<double> row = detail::parse_csv_numbers(line, "measure_from_csv");
        if (row.size() < 2) throw std::runtime_error("measure_from_csv: row needs a weight and at least one coordinate");
        weights.push_back(row.front());
        atoms.emplace_back(row.begin() + 1, row.end());
    }
    if (atoms.empty()) throw std::runtime_error("measure_from_csv: no data rows");
    return DiscreteMeasure(std::move(atoms), std::move(weights));
}

} // namespace pathspace
