#pragma once

#include "hppl/util/json_writer.hpp"
#include "hppl/verify/division.hpp"
#include "hppl/verify/memory.hpp"

namespace hppl {

/// {exact: [{var, site, verdict, reason?, at?}], memory: {verdict, bound?, m?, witness?, witness_stmt?, detail?}}
Json to_json(const DivisionResult& division, const MemoryVerdict& memory);

}  // namespace hppl
