#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpdsvm {

// One nonzero feature. Indices are 0-based internally; the LIBSVM text format
// is 1-based and the conversion happens at parse/serialize time.
struct Feature {
    std::int32_t index;
    double value;
};

inline bool operator==(const Feature& a, const Feature& b) {
    return a.index == b.index && a.value == b.value;
}

// Sorted by strictly ascending index, values finite and nonzero.
using SparseVector = std::vector<Feature>;

double dot(const SparseVector& a, const SparseVector& b);
double squared_norm(const SparseVector& a);
double squared_distance(const SparseVector& a, const SparseVector& b);

struct Dataset {
    std::vector<SparseVector> points;
    std::vector<double> labels;  // raw labels, one per point
    std::int32_t dim = 0;        // max 1-based feature index seen (or an override)

    std::size_t size() const { return points.size(); }
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Parses LIBSVM sparse text: `<label> <index>:<value> ...` per non-empty line,
// `#` starts a comment, LF or CRLF endings. Explicit zero values are dropped.
Dataset parse_libsvm(std::istream& in);
Dataset load_libsvm_file(const std::string& path);
void write_libsvm(std::ostream& out, const Dataset& d);

// Maps raw labels to dense class indices in ascending label order.
struct LabelMap {
    std::vector<double> classes;  // sorted ascending, distinct

    std::size_t num_classes() const { return classes.size(); }
    // Index of a raw label, or -1 when the label was never seen.
    int index_of(double raw) const;
};

LabelMap build_label_map(std::span<const double> labels);

}  // namespace lpdsvm
