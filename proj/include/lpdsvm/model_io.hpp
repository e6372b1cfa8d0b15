#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "lpdsvm/dataio.hpp"
#include "lpdsvm/multiclass.hpp"

namespace lpdsvm {

class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Text container, header `LPDSVM 1`, keyed sections in fixed order
// (kernel, labels, meta, landmarks, L, betas, converged). Reals are written
// with 17 significant digits, so export -> import -> export is
// byte-identical.
void export_model(const OvoModel& model, std::ostream& out);
void save_model(const OvoModel& model, const std::string& path);

OvoModel import_model(std::istream& in);
OvoModel load_model(const std::string& path);

struct PredictFileResult {
    std::size_t points = 0;
    std::optional<double> error_rate;  // absent for an empty dataset
};

// Writes one predicted raw label per line in input order and scores against
// the dataset labels; labels of classes unknown to the model count as errors.
PredictFileResult predict_file(const OvoModel& model, const Dataset& data, std::ostream& out,
                               int num_threads = 1);

}  // namespace lpdsvm
