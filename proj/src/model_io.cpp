#include "lpdsvm/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lpdsvm/format.hpp"

namespace lpdsvm {

namespace {

const char* kHeader = "LPDSVM 1";

std::string kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::Gaussian:
            return "gaussian";
    }
    throw ModelFormatError("unknown kernel kind");
}

class SectionReader {
public:
    explicit SectionReader(std::istream& in) : in_(in) {}

    // next line, stripped of a trailing CR; throws on EOF
    std::string line(const char* what) {
        std::string s;
        if (!std::getline(in_, s)) throw ModelFormatError(std::string("truncated model: ") + what);
        if (!s.empty() && s.back() == '\r') s.pop_back();
        return s;
    }

    std::istringstream keyed(const char* key) {
        std::string s = line(key);
        std::istringstream ss(s);
        std::string k;
        ss >> k;
        if (k != key)
            throw ModelFormatError(std::string("expected section '") + key + "', got '" + k + "'");
        return ss;
    }

private:
    std::istream& in_;
};

double parse_double(std::istringstream& ss, const char* what) {
    double v;
    if (!(ss >> v)) throw ModelFormatError(std::string("bad number in ") + what);
    return v;
}

long long parse_int(std::istringstream& ss, const char* what) {
    long long v;
    if (!(ss >> v)) throw ModelFormatError(std::string("bad integer in ") + what);
    return v;
}

}  // namespace

void export_model(const OvoModel& model, std::ostream& out) {
    const std::size_t b = model.landmarks.size();
    const std::size_t b_eff = model.L.cols();
    const std::size_t num_pairs = model.num_pairs();

    out << kHeader << '\n';
    out << "kernel " << kernel_name(model.kernel.kind) << ' ' << format_g17(model.kernel.gamma)
        << '\n';
    out << "labels " << model.label_map.num_classes();
    for (double v : model.label_map.classes) out << ' ' << format_g17(v);
    out << '\n';
    out << "meta C " << format_g17(model.C) << " eps " << format_g17(model.eps) << " seed "
        << model.seed << '\n';

    out << "landmarks " << b << '\n';
    for (const SparseVector& lm : model.landmarks) {
        bool first = true;
        for (const Feature& f : lm) {
            if (!first) out << ' ';
            out << (f.index + 1) << ':' << format_g17(f.value);
            first = false;
        }
        out << '\n';
    }

    out << "L " << b << ' ' << b_eff << '\n';
    for (std::size_t i = 0; i < b; ++i) {
        const double* row = model.L.row(i);
        for (std::size_t j = 0; j < b_eff; ++j) {
            if (j) out << ' ';
            out << format_g17(row[j]);
        }
        out << '\n';
    }

    out << "betas " << num_pairs << ' ' << b << '\n';
    for (std::size_t p = 0; p < num_pairs; ++p) {
        const double* row = model.betas.row(p);
        for (std::size_t j = 0; j < b; ++j) {
            if (j) out << ' ';
            out << format_g17(row[j]);
        }
        out << '\n';
    }

    out << "converged " << num_pairs;
    for (std::size_t p = 0; p < num_pairs; ++p)
        out << ' ' << (model.pair_converged[p] ? 1 : 0);
    out << '\n';

    if (!out) throw std::runtime_error("write failure while exporting model");
}

void save_model(const OvoModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    export_model(model, out);
}

OvoModel import_model(std::istream& in) {
    SectionReader reader(in);
    if (reader.line("header") != kHeader)
        throw ModelFormatError("unsupported model version (expected 'LPDSVM 1')");

    OvoModel model;

    {
        auto ss = reader.keyed("kernel");
        std::string kind;
        ss >> kind;
        if (kind != "gaussian") throw ModelFormatError("unknown kernel kind '" + kind + "'");
        model.kernel.kind = KernelKind::Gaussian;
        model.kernel.gamma = parse_double(ss, "kernel");
        validate(model.kernel);
    }
    {
        auto ss = reader.keyed("labels");
        long long c = parse_int(ss, "labels");
        if (c < 2) throw ModelFormatError("model needs at least two classes");
        model.label_map.classes.resize(static_cast<std::size_t>(c));
        for (auto& v : model.label_map.classes) v = parse_double(ss, "labels");
        for (std::size_t i = 1; i < model.label_map.classes.size(); ++i)
            if (!(model.label_map.classes[i - 1] < model.label_map.classes[i]))
                throw ModelFormatError("labels must be strictly ascending");
    }
    {
        auto ss = reader.keyed("meta");
        std::string key;
        ss >> key;
        if (key != "C") throw ModelFormatError("expected C in meta");
        model.C = parse_double(ss, "meta");
        ss >> key;
        if (key != "eps") throw ModelFormatError("expected eps in meta");
        model.eps = parse_double(ss, "meta");
        ss >> key;
        if (key != "seed") throw ModelFormatError("expected seed in meta");
        if (!(ss >> model.seed)) throw ModelFormatError("bad seed in meta");
    }

    std::size_t b;
    {
        auto ss = reader.keyed("landmarks");
        long long v = parse_int(ss, "landmarks");
        if (v < 1) throw ModelFormatError("landmark count must be positive");
        b = static_cast<std::size_t>(v);
    }
    model.landmarks.resize(b);
    for (std::size_t i = 0; i < b; ++i) {
        std::istringstream ss(reader.line("landmark"));
        SparseVector point;
        std::string token;
        std::int32_t prev = 0;
        while (ss >> token) {
            auto colon = token.find(':');
            if (colon == std::string::npos)
                throw ModelFormatError("malformed landmark feature '" + token + "'");
            long idx = std::strtol(token.c_str(), nullptr, 10);
            double value = std::strtod(token.c_str() + colon + 1, nullptr);
            if (idx <= prev) throw ModelFormatError("landmark indices not ascending");
            if (!std::isfinite(value)) throw ModelFormatError("non-finite landmark value");
            prev = static_cast<std::int32_t>(idx);
            point.push_back({static_cast<std::int32_t>(idx) - 1, value});
        }
        model.landmarks[i] = std::move(point);
    }

    {
        auto ss = reader.keyed("L");
        auto rows = parse_int(ss, "L");
        auto cols = parse_int(ss, "L");
        if (rows != static_cast<long long>(b))
            throw ModelFormatError("L row count does not match landmark count");
        if (cols < 1 || cols > rows) throw ModelFormatError("invalid L column count");
        model.L = Matrix(b, static_cast<std::size_t>(cols));
        for (std::size_t i = 0; i < b; ++i) {
            std::istringstream row(reader.line("L row"));
            for (std::size_t j = 0; j < model.L.cols(); ++j) {
                if (!(row >> model.L(i, j))) throw ModelFormatError("truncated L row");
            }
        }
    }

    const std::size_t c = model.label_map.num_classes();
    const std::size_t expected_pairs = c * (c - 1) / 2;
    {
        auto ss = reader.keyed("betas");
        auto num_pairs = parse_int(ss, "betas");
        auto cols = parse_int(ss, "betas");
        if (num_pairs != static_cast<long long>(expected_pairs))
            throw ModelFormatError("beta count does not match the class count");
        if (cols != static_cast<long long>(b))
            throw ModelFormatError("beta length does not match landmark count");
        model.betas = Matrix(expected_pairs, b);
        for (std::size_t p = 0; p < expected_pairs; ++p) {
            std::istringstream row(reader.line("beta row"));
            for (std::size_t j = 0; j < b; ++j)
                if (!(row >> model.betas(p, j))) throw ModelFormatError("truncated beta row");
        }
    }
    {
        auto ss = reader.keyed("converged");
        auto count = parse_int(ss, "converged");
        if (count != static_cast<long long>(expected_pairs))
            throw ModelFormatError("converged flag count mismatch");
        model.pair_converged.resize(expected_pairs);
        for (std::size_t p = 0; p < expected_pairs; ++p) {
            long long flag = parse_int(ss, "converged");
            model.pair_converged[p] = flag ? 1 : 0;
        }
    }

    if (!model.betas.all_finite() || !model.L.all_finite())
        throw ModelFormatError("non-finite model coefficients");
    return model;
}

OvoModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return import_model(in);
}

PredictFileResult predict_file(const OvoModel& model, const Dataset& data, std::ostream& out,
                               int num_threads) {
    PredictFileResult result;
    result.points = data.size();
    if (data.size() == 0) return result;

    std::vector<double> predictions = ovo_predict(model, data.points, num_threads);
    for (double p : predictions) out << format_label(p) << '\n';
    if (!out) throw std::runtime_error("write failure while emitting predictions");

    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (predictions[i] != data.labels[i]) ++wrong;
    result.error_rate = static_cast<double>(wrong) / static_cast<double>(data.size());
    return result;
}

}  // namespace lpdsvm
