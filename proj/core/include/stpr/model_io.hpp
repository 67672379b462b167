#pragma once

// Plain-text model files: flat key=value lines, doubles printed with %.17g
// so a write/read round-trip is exact.

#include "stpr/roc.hpp"
#include "stpr/solver.hpp"

#include <optional>
#include <string>

namespace stpr {

struct ModelRecord {
    CombinationModel model;
    // Training-quantile threshold re-estimated from the fitting data; the
    // evaluation protocol uses this, not the solver's own delta.
    std::optional<double> train_threshold;
    std::optional<FitDiagnostics> diagnostics;
};

void write_model_file(const ModelRecord& record, const std::string& path);
ModelRecord read_model_file(const std::string& path);

// Shared %.17g formatting used by every text emitter.
std::string format_double(double value);

}  // namespace stpr
