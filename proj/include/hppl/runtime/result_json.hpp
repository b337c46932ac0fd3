#pragma once

#include "hppl/runtime/inference.hpp"
#include "hppl/util/json_writer.hpp"

namespace hppl {

/// {posterior, mean, variance, log_evidence, diagnostics{sampled_vars, peak_live, live_trace}}
Json to_json(const InferenceResult& r);

/// {posterior, mean, variance, log_evidence}
Json to_json(const OracleResult& r);

}  // namespace hppl
