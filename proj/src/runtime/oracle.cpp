#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hppl/runtime/compile.hpp"
#include "hppl/runtime/inference.hpp"
#include "hppl/runtime/interpreter.hpp"

namespace hppl {

double OracleResult::mean() const {
  double m = 0.0;
  for (const auto& c : mixture) m += c.weight * c.mean;
  return m;
}

double OracleResult::variance() const {
  const double m = mean();
  double v = 0.0;
  for (const auto& c : mixture) v += c.weight * (c.variance + (c.mean - m) * (c.mean - m));
  return v;
}

OracleResult oracle_posterior(const CheckedProgram& program, const DataTable& data, int max_discrete) {
  const Compiled code = compile(program);
  ExecOptions opts;
  opts.enforce_exact = false;
  opts.force_bernoulli_at_sample = true;
  opts.draw = DrawMode::Enumerate;
  const Interpreter interp(code, bind_columns(program, data), opts);

  std::vector<OracleResult::Component> found;
  std::vector<double> logw;
  std::vector<std::vector<int>> pending{{}};
  while (!pending.empty()) {
    Tape tape;
    tape.prefix = std::move(pending.back());
    tape.limit = static_cast<std::size_t>(max_discrete);
    pending.pop_back();
    ExecCtx ctx;
    ctx.tape = &tape;
    Particle p = interp.make_particle(Stream(0));
    interp.exec_block(p, code.body, ctx);
    if (p.logw != -std::numeric_limits<double>::infinity()) interp.settle_result(p, ctx);
    for (std::size_t j = tape.prefix.size(); j < tape.taken.size(); ++j) {
      const int alt = 1 - tape.taken[j];
      const double prob = alt ? tape.probs[j] : 1.0 - tape.probs[j];
      if (prob <= 0.0) continue;
      std::vector<int> next(tape.taken.begin(), tape.taken.begin() + static_cast<std::ptrdiff_t>(j));
      next.push_back(alt);
      pending.push_back(std::move(next));
    }
    if (p.logw == -std::numeric_limits<double>::infinity()) continue;
    PosteriorComponent s = interp.summarize(p);
    OracleResult::Component c;
    c.mean = s.mean;
    c.variance = s.kind == PosteriorComponent::Kind::Gaussian    ? s.variance
                 : s.kind == PosteriorComponent::Kind::Bernoulli ? s.mean * (1.0 - s.mean)
                                                                 : 0.0;
    c.choices = tape.taken;
    found.push_back(std::move(c));
    logw.push_back(p.logw);
  }
  if (found.empty()) throw std::runtime_error("the observations have zero probability under the model");

  std::vector<std::size_t> order(found.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return found[a].choices < found[b].choices; });

  const double top = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double w : logw) total += std::exp(w - top);
  OracleResult out;
  out.log_evidence = top + std::log(total);
  for (std::size_t k : order) {
    found[k].weight = std::exp(logw[k] - top) / total;
    out.mixture.push_back(std::move(found[k]));
  }
  return out;
}

}  // namespace hppl
