#include "hppl/runtime/compile.hpp"
#include "hppl/runtime/inference.hpp"
#include "hppl/runtime/interpreter.hpp"

namespace hppl {

DataTable simulate(const CheckedProgram& program, std::uint64_t seed) {
  const Compiled code = compile(program);
  ExecOptions opts;
  opts.enforce_exact = false;
  opts.force_all_at_sample = true;
  opts.record_observations = true;
  opts.zero_data = true;
  const Interpreter interp(code, {}, opts);
  Recorder rec;
  const auto& params = program.program().params;
  rec.columns.resize(params.size());
  ExecCtx ctx;
  ctx.recorder = &rec;
  Particle p = interp.make_particle(Stream(Stream::derive(seed, 0, 0)));
  interp.exec_block(p, code.body, ctx);
  DataTable out;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!rec.columns[k].empty()) out.add_column(params[k], std::move(rec.columns[k]));
  }
  return out;
}

}  // namespace hppl
