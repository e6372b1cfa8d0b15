#include "lpdsvm/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "lpdsvm/format.hpp"

namespace lpdsvm {

double dot(const SparseVector& a, const SparseVector& b) {
    double r = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].index == b[j].index) {
            r += a[i].value * b[j].value;
            ++i;
            ++j;
        } else if (a[i].index < b[j].index) {
            ++i;
        } else {
            ++j;
        }
    }
    return r;
}

double squared_norm(const SparseVector& a) {
    double r = 0.0;
    for (const Feature& f : a) r += f.value * f.value;
    return r;
}

double squared_distance(const SparseVector& a, const SparseVector& b) {
    double r = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].index == b[j].index) {
            double d = a[i].value - b[j].value;
            r += d * d;
            ++i;
            ++j;
        } else if (a[i].index < b[j].index) {
            r += a[i].value * a[i].value;
            ++i;
        } else {
            r += b[j].value * b[j].value;
            ++j;
        }
    }
    for (; i < a.size(); ++i) r += a[i].value * a[i].value;
    for (; j < b.size(); ++j) r += b[j].value * b[j].value;
    return r;
}

namespace {

const char* skip_ws(const char* p) {
    while (*p == ' ' || *p == '\t') ++p;
    return p;
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
    Dataset d;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);

        const char* p = skip_ws(line.c_str());
        if (*p == '\0') continue;

        char* end = nullptr;
        double label = std::strtod(p, &end);
        if (end == p || !(*end == '\0' || *end == ' ' || *end == '\t'))
            throw ParseError(line_no, "non-numeric label");
        if (!std::isfinite(label)) throw ParseError(line_no, "non-finite label");
        p = end;

        SparseVector point;
        std::int32_t prev_index = 0;
        for (;;) {
            p = skip_ws(p);
            if (*p == '\0') break;

            long idx = std::strtol(p, &end, 10);
            if (end == p || *end != ':')
                throw ParseError(line_no, "malformed feature (expected <index>:<value>)");
            if (idx <= 0) throw ParseError(line_no, "feature index must be positive");
            p = end + 1;

            double value = std::strtod(p, &end);
            if (end == p || !(*end == '\0' || *end == ' ' || *end == '\t'))
                throw ParseError(line_no, "malformed feature value");
            if (std::isnan(value) || std::isinf(value))
                throw ParseError(line_no, "non-finite feature value");
            p = end;

            if (idx <= prev_index)
                throw ParseError(line_no, "feature indices not strictly ascending");
            prev_index = static_cast<std::int32_t>(idx);

            if (static_cast<std::int32_t>(idx) > d.dim) d.dim = static_cast<std::int32_t>(idx);
            if (value != 0.0)
                point.push_back({static_cast<std::int32_t>(idx) - 1, value});
        }

        d.points.push_back(std::move(point));
        d.labels.push_back(label);
    }
    return d;
}

Dataset load_libsvm_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_libsvm(in);
}

void write_libsvm(std::ostream& out, const Dataset& d) {
    for (std::size_t i = 0; i < d.size(); ++i) {
        out << format_label(d.labels[i]);
        for (const Feature& f : d.points[i])
            out << ' ' << (f.index + 1) << ':' << format_shortest(f.value);
        out << '\n';
    }
}

int LabelMap::index_of(double raw) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), raw);
    if (it == classes.end() || *it != raw) return -1;
    return static_cast<int>(it - classes.begin());
}

LabelMap build_label_map(std::span<const double> labels) {
    if (labels.empty()) throw std::invalid_argument("no labels given");
    LabelMap map;
    map.classes.assign(labels.begin(), labels.end());
    std::sort(map.classes.begin(), map.classes.end());
    map.classes.erase(std::unique(map.classes.begin(), map.classes.end()), map.classes.end());
    return map;
}

}  // namespace lpdsvm
